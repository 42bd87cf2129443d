use std::process::{Command, Output};

use matchmarket::solve::{closed_form_assortative_k2_unknowns, closed_form_disassortative};
use matchmarket::Probability64;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchmarket"))
        .args(args)
        .env_remove("MATCHMARKET_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV emission as (header, rows), footer dropped.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn twoway_rows_are_uniform() {
    let (h, rows) = csv(&stdout(&["solve", "twoway", "--kbar", "2", "--p", "0.3"]));
    assert_eq!(h, ["p", "kbar", "k", "pi"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((num(&r[3]) - 0.2).abs() < 1e-12);
    }
}

#[test]
fn lumped_rows_match_closed_form() {
    let text = stdout(&["solve", "assortative", "--kbar", "2", "--p", "0.5", "--lumped"]);
    assert!(text.lines().last().unwrap().starts_with("# method=direct-solve residual="));
    let (h, rows) = csv(&text);
    assert_eq!(rows.len(), 6);
    let (m, pc, pw) = (col(&h, "multiplicity"), col(&h, "pi_class"), col(&h, "pi_weighted"));
    let total: f64 = rows.iter().map(|r| num(&r[pw])).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let closed = closed_form_assortative_k2_unknowns(&Probability64::new(0.5).unwrap());
    for (r, x) in rows.iter().zip(closed) {
        assert!((num(&r[pc]) - x).abs() < 1e-9);
        assert!((num(&r[m]) * num(&r[pc]) - num(&r[pw])).abs() < 1e-15);
    }
}

#[test]
fn full_assortative_has_nineteen_states() {
    let (h, rows) = csv(&stdout(&["solve", "assortative", "--kbar", "2", "--p", "0.4"]));
    assert_eq!(h, ["p", "kbar", "a1", "a2", "a3", "pi"]);
    assert_eq!(rows.len(), 19);
}

#[test]
fn disassortative_at_half_is_one_sixth_two_thirds() {
    let (_, rows) = csv(&stdout(&["solve", "disassortative", "--kh", "1", "--kl", "1", "--p", "0.5"]));
    let got: Vec<(i64, f64)> = rows.iter().map(|r| (r[3].parse().unwrap(), num(&r[4]))).collect();
    assert_eq!(got.iter().map(|g| g.0).collect::<Vec<_>>(), [-1, 0, 1]);
    for ((_, x), want) in got.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
        assert!((x - want).abs() < 1e-12);
    }
}

#[test]
fn lumped_sweep_normalizes_per_grid_point() {
    let text = stdout(&["sweep", "assortative", "--kbar", "2", "--p-grid", "0.1:0.9:0.1", "--lumped"]);
    let (h, rows) = csv(&text);
    assert_eq!(rows.len(), 9 * 6);
    let pw = col(&h, "pi_weighted");
    for block in rows.chunks(6) {
        assert!(block.iter().all(|r| r[0] == block[0][0]));
        let total: f64 = block.iter().map(|r| num(&r[pw])).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn disassortative_sweep_covers_threshold_grid() {
    let (_, rows) = csv(&stdout(&[
        "sweep", "disassortative", "--p", "0.5", "--kh-list", "1,2,5", "--kl-list", "1,2,5",
    ]));
    let mut configs: Vec<(String, String)> = rows.iter().map(|r| (r[1].clone(), r[2].clone())).collect();
    configs.dedup();
    assert_eq!(configs.len(), 9);
    for (kh, kl) in configs {
        let block: Vec<f64> = rows
            .iter()
            .filter(|r| r[1] == kh && r[2] == kl)
            .map(|r| num(&r[4]))
            .collect();
        let p = Probability64::new(0.5).unwrap();
        let want = closed_form_disassortative(&p, kh.parse().unwrap(), kl.parse().unwrap());
        assert_eq!(block.len(), want.probs.len());
        for (x, y) in block.iter().zip(&want.probs) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn sweeps_are_byte_stable() {
    let args = ["sweep", "assortative", "--kbar", "2,3,9", "--p-grid", "0.05:0.95:0.05", "--lumped"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let json = ["--format", "json", "sweep", "twoway", "--kbar", "1,4", "--p", "0.2,0.7"];
    assert_eq!(run(&json).stdout, run(&json).stdout);
}

#[test]
fn argument_errors_exit_two() {
    for args in [
        &["sweep", "assortative", "--kbar", "2", "--p-grid", "0.9:0.1:0.1"][..],
        &["sweep", "assortative", "--kbar", "2", "--p-grid", "0.1:0.9"],
        &["solve", "twoway", "--kbar", "2", "--p", "1.5"],
        &["solve", "twoway", "--kbar", "2", "--p", "0"],
        &["solve", "assortative", "--kbar", "0", "--p", "0.5"],
        &["solve", "twoway", "--p", "0.5"],
        &["simulate", "disassortative", "--p", "0.5", "--steps", "10", "--seed", "1"],
        &["welfare", "assortative", "--p", "0.5"],
        &["bogus"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn json_mirrors_csv_columns() {
    let text = stdout(&["--format", "json", "solve", "assortative", "--kbar", "2", "--p", "0.5", "--lumped"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["method"], "direct-solve");
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["meta"]["residual"].as_f64().unwrap() < 1e-12);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["p", "kbar", "class", "a1", "a2", "a3", "multiplicity", "pi_class", "pi_weighted"]
    );

    let csv_text = stdout(&["solve", "assortative", "--kbar", "2", "--p", "0.5", "--lumped"]);
    let (_, csv_rows) = csv(&csv_text);
    for (j, c) in rows.iter().zip(&csv_rows) {
        assert_eq!(j["pi_class"].to_string(), c[7]);
    }
}

#[test]
fn format_env_sets_default() {
    let out = Command::new(env!("CARGO_BIN_EXE_matchmarket"))
        .args(["solve", "twoway", "--kbar", "1", "--p", "0.5"])
        .env("MATCHMARKET_FORMAT", "json")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);

    let flag = Command::new(env!("CARGO_BIN_EXE_matchmarket"))
        .args(["--format", "csv", "solve", "twoway", "--kbar", "1", "--p", "0.5"])
        .env("MATCHMARKET_FORMAT", "json")
        .output()
        .unwrap();
    assert!(String::from_utf8(flag.stdout).unwrap().starts_with("p,kbar,k,pi\n"));
}

fn simulate_json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json", "simulate"];
    full.extend_from_slice(args);
    serde_json::from_str(&stdout(&full)).unwrap()
}

#[test]
fn assortative_simulation_is_close_and_repeatable() {
    let args = ["assortative", "--kbar", "2", "--p", "0.5", "--steps", "1000000", "--seed", "7"];
    let v = simulate_json(&args);
    assert!(v["summary"]["tv"].as_f64().unwrap() < 0.02);
    assert_eq!(v["meta"]["method"], "empirical");
    assert_eq!(v["states"].as_array().unwrap().len(), 19);

    let mut csv_args = vec!["simulate"];
    csv_args.extend_from_slice(&args);
    assert_eq!(run(&csv_args).stdout, run(&csv_args).stdout);
}

#[test]
fn disassortative_simulation_recovers_two_thirds() {
    let v = simulate_json(&[
        "disassortative", "--kh", "1", "--kl", "1", "--p", "0.5", "--steps", "1000000", "--seed", "7",
    ]);
    let zero = v["states"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["state"] == "0")
        .unwrap();
    assert!((zero["empirical"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.01);
    assert_eq!(v["config"]["burn_in"], 100000);
}

#[test]
fn welfare_flags_one_best_row() {
    let (h, rows) = csv(&stdout(&["welfare", "assortative", "--p", "0.5", "--kbar", "1,2,3"]));
    assert_eq!(h, ["p", "kbar", "welfare", "mean_total_waiting", "best"]);
    assert_eq!(rows.iter().filter(|r| r[4] == "true").count(), 1);

    // Zero waiting cost is rejected rather than silently accepted.
    let out = run(&["welfare", "twoway", "--p", "0.5", "--kbar", "1", "--cost", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

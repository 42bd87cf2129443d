//! CSV and JSON rendering. Numbers use `%.17g` text in both formats.

use std::collections::BTreeMap;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use matchmarket::montecarlo::SimulationReport;
use matchmarket::table::{format_g17, Cell, Table};
use matchmarket::{ChainKind, Composition, Distribution64, Method};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format_g17(x).parse::<Number>().expect("finite %.17g is a JSON number"))
    } else {
        Value::Null
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => Value::from(*i),
        Cell::Real(x) => real(*x),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

fn meta(method: Method, residual: Option<f64>) -> Value {
    let mut m = Map::new();
    m.insert("method".into(), method.name().into());
    m.insert("residual".into(), residual.map_or(Value::Null, real));
    m.insert("version".into(), VERSION.into());
    Value::Object(m)
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn emit_table(t: &Table, format: Format) -> String {
    match format {
        Format::Csv => t.to_csv(),
        Format::Json => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        t.columns
                            .iter()
                            .zip(r)
                            .map(|(k, c)| (k.to_string(), cell_json(c)))
                            .collect(),
                    )
                })
                .collect();
            let mut top = Map::new();
            top.insert("meta".into(), meta(t.method, t.residual));
            top.insert("rows".into(), Value::Array(rows));
            render_json(&Value::Object(top))
        }
    }
}

/// Long-format simulation table: `record,key,value,exact,std_error`.
fn simulation_table(
    report: &SimulationReport,
    exact: &Distribution64,
    rates: &BTreeMap<Composition, f64>,
    tv: f64,
) -> Table {
    let cfg = &report.config;
    let mut t = Table::empty(vec!["record", "key", "value", "exact", "std_error"], 2);
    t.method = Method::Empirical;
    let blank = || Cell::Text(String::new());
    let mut push = |record: &str, key: String, value: Cell, exact: Cell, se: Cell| {
        t.rows.push(vec![Cell::Text(record.into()), Cell::Text(key), value, exact, se]);
    };

    push("config", "kind".into(), Cell::Text(cfg.kind.name().into()), blank(), blank());
    push("config", "p".into(), Cell::Real(cfg.p), blank(), blank());
    match cfg.kind {
        ChainKind::Disassortative => {
            push("config", "kh".into(), Cell::Int(cfg.thresholds.k_high as i64), blank(), blank());
            push("config", "kl".into(), Cell::Int(cfg.thresholds.k_low as i64), blank(), blank());
        }
        _ => push("config", "kbar".into(), Cell::Int(cfg.thresholds.k_bar as i64), blank(), blank()),
    }
    for (k, v) in [
        ("steps", cfg.steps),
        ("burn_in", cfg.burn_in),
        ("seed", cfg.seed),
        ("batches", cfg.batches),
    ] {
        push("config", k.into(), Cell::Int(v as i64), blank(), blank());
    }

    push("summary", "tv".into(), Cell::Real(tv), blank(), blank());
    push("summary", "recorded".into(), Cell::Int(report.recorded() as i64), blank(), blank());
    push("summary", "invariant_checks".into(), Cell::Int(report.invariant_checks as i64), blank(), blank());
    push("summary", "forced_teams".into(), Cell::Int(report.forced_teams as i64), blank(), blank());

    for (i, s) in report.empirical.states.iter().enumerate() {
        push(
            "state",
            s.to_string(),
            Cell::Real(report.empirical.probs[i]),
            Cell::Real(exact.probs[i]),
            blank(),
        );
    }
    let estimates = report.team_rate_estimates();
    for (c, est) in &estimates {
        push(
            "team",
            c.to_string(),
            Cell::Real(est.mean),
            Cell::Real(*rates.get(c).unwrap_or(&0.0)),
            Cell::Real(est.std_error),
        );
    }
    t
}

pub fn emit_simulation(
    report: &SimulationReport,
    exact: &Distribution64,
    rates: &BTreeMap<Composition, f64>,
    tv: f64,
    format: Format,
) -> String {
    let table = simulation_table(report, exact, rates, tv);
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut sections: Map<String, Value> = Map::new();
            sections.insert("meta".into(), meta(Method::Empirical, None));
            for row in &table.rows {
                let (record, key) = match (&row[0], &row[1]) {
                    (Cell::Text(r), Cell::Text(k)) => (r.as_str(), k.clone()),
                    _ => unreachable!("record and key are text"),
                };
                match record {
                    "config" | "summary" => {
                        let obj = sections
                            .entry(record.to_string())
                            .or_insert_with(|| Value::Object(Map::new()));
                        obj.as_object_mut().unwrap().insert(key, cell_json(&row[2]));
                    }
                    _ => {
                        let mut entry = Map::new();
                        let name = if record == "state" { "state" } else { "composition" };
                        entry.insert(name.into(), Value::String(key));
                        let (value, exact) = if record == "state" {
                            ("empirical", "exact")
                        } else {
                            ("rate", "analytic")
                        };
                        entry.insert(value.into(), cell_json(&row[2]));
                        entry.insert(exact.into(), cell_json(&row[3]));
                        if record == "team" {
                            entry.insert("std_error".into(), cell_json(&row[4]));
                        }
                        let list = sections
                            .entry(format!("{record}s"))
                            .or_insert_with(|| Value::Array(Vec::new()));
                        list.as_array_mut().unwrap().push(Value::Object(entry));
                    }
                }
            }
            render_json(&Value::Object(sections))
        }
    }
}

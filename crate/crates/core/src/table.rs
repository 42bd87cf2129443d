//! Tabular stationary-law output shared by the command line and tests.

use std::fmt::Write as _;
use std::ops::Range;

use crate::chain::{build_matrix, lump_by_symmetry};
use crate::domain::{ChainKind, Probability, State, ThresholdConfig};
use crate::error::{Error, Result};
use crate::solve::{stationary_direct, Method};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_g17(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Bool(_) | Cell::Text(_) => None,
        }
    }
}

/// Rows for one or more solved configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Row ranges, one per configuration, in emission order.
    pub blocks: Vec<Range<usize>>,
    /// Column whose entries sum to 1 within each block.
    pub mass_column: usize,
    pub method: Method,
    /// Largest `‖πP − π‖∞` over all blocks, for solved tables.
    pub residual: Option<f64>,
}

impl Table {
    pub fn empty(columns: Vec<&'static str>, mass_column: usize) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            blocks: Vec::new(),
            mass_column,
            method: Method::DirectSolve,
            residual: None,
        }
    }

    fn append(&mut self, other: Table) {
        let offset = self.rows.len();
        self.rows.extend(other.rows);
        self.blocks
            .extend(other.blocks.into_iter().map(|r| r.start + offset..r.end + offset));
        self.residual = match (self.residual, other.residual) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    /// Sum of the mass column in each block.
    pub fn block_totals(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|r| {
                self.rows[r.clone()]
                    .iter()
                    .filter_map(|row| row[self.mass_column].as_f64())
                    .sum()
            })
            .collect()
    }

    /// Header, rows, then a `# method=… residual=…` footer (residual only
    /// when known).
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c.render())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let _ = write!(out, "# method={}", self.method);
        if let Some(r) = self.residual {
            let _ = write!(out, " residual={}", format_g17(r));
        }
        out.push('\n');
        out
    }
}

fn csv_field(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// `printf("%.17g")` formatting.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses `start:stop:step` into grid points with `0 < start ≤ stop < 1`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParams(format!("grid '{text}': {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad("not a number")))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if start > stop {
        return Err(bad("start exceeds stop"));
    }
    if !(start > 0.0 && stop < 1.0) {
        return Err(bad("points must lie in (0, 1)"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn columns(kind: ChainKind, lumped: bool) -> (Vec<&'static str>, usize) {
    match (kind, lumped) {
        (ChainKind::Assortative, true) => (
            vec!["p", "kbar", "class", "a1", "a2", "a3", "multiplicity", "pi_class", "pi_weighted"],
            8,
        ),
        (ChainKind::Assortative, false) => (vec!["p", "kbar", "a1", "a2", "a3", "pi"], 5),
        (ChainKind::Disassortative, _) => (vec!["p", "kh", "kl", "k", "pi"], 4),
        (ChainKind::TwoWay, _) => (vec!["p", "kbar", "k", "pi"], 3),
    }
}

/// Direct-solve table for one configuration. `lumped` only applies to the
/// assortative chain.
pub fn solve_table(kind: ChainKind, p: f64, t: ThresholdConfig, lumped: bool) -> Result<Table> {
    let lumped = lumped && kind == ChainKind::Assortative;
    let prob = Probability::new(p)?;
    let m = build_matrix(kind, &prob, t)?;
    let (cols, mass) = columns(kind, lumped);
    let mut table = Table::empty(cols, mass);

    if lumped {
        let l = lump_by_symmetry(&m)?;
        let dist = stationary_direct(&l.matrix)?;
        let per_state = l.per_state(&dist.probs);
        for (i, class) in l.classes.iter().enumerate() {
            let a = class.0;
            table.rows.push(vec![
                Cell::Real(p),
                Cell::Int(t.k_bar as i64),
                Cell::Int(i as i64),
                Cell::Int(a[0] as i64),
                Cell::Int(a[1] as i64),
                Cell::Int(a[2] as i64),
                Cell::Int(l.multiplicity[i] as i64),
                Cell::Real(per_state[i]),
                Cell::Real(dist.probs[i]),
            ]);
        }
        table.residual = dist.residual;
    } else {
        let dist = stationary_direct(&m)?;
        for (s, pi) in dist.states.iter().zip(&dist.probs) {
            let mut row = vec![Cell::Real(p)];
            match (kind, s) {
                (ChainKind::Assortative, State::Assortative(a)) => {
                    row.push(Cell::Int(t.k_bar as i64));
                    row.extend(a.0.iter().map(|&x| Cell::Int(x as i64)));
                }
                (ChainKind::Disassortative, State::Signed(k)) => {
                    row.push(Cell::Int(t.k_high as i64));
                    row.push(Cell::Int(t.k_low as i64));
                    row.push(Cell::Int(k.0));
                }
                (_, State::Signed(k)) => {
                    row.push(Cell::Int(t.k_bar as i64));
                    row.push(Cell::Int(k.0));
                }
                _ => return Err(Error::InvalidState(s.to_string())),
            }
            row.push(Cell::Real(*pi));
            table.rows.push(row);
        }
        table.residual = dist.residual;
    }
    table.blocks.push(0..table.rows.len());
    Ok(table)
}

/// Concatenated tables over `ps × thresholds`, grid-major.
pub fn sweep_table(
    kind: ChainKind,
    ps: &[f64],
    thresholds: &[ThresholdConfig],
    lumped: bool,
) -> Result<Table> {
    if ps.is_empty() || thresholds.is_empty() {
        return Err(Error::InvalidParams("empty sweep".into()));
    }
    let (cols, mass) = columns(kind, lumped && kind == ChainKind::Assortative);
    let mut table = Table::empty(cols, mass);
    for &p in ps {
        for t in thresholds {
            table.append(solve_table(kind, p, *t, lumped)?);
        }
    }
    Ok(table)
}

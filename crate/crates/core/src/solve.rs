//! Stationary distributions: pivoted direct solve, power iteration, and
//! closed forms used as independent oracles.

use std::fmt;

use crate::chain::{enumerate_signed_states, TransitionMatrix};
use crate::domain::{AssortativeState, Probability, State};
use crate::error::{Error, Result};
use crate::scalar::{horner, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    DirectSolve,
    PowerIteration,
    ClosedForm,
    Empirical,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DirectSolve => "direct-solve",
            Method::PowerIteration => "power-iteration",
            Method::ClosedForm => "closed-form",
            Method::Empirical => "empirical",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probability vector aligned to `states`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution<T> {
    pub states: Vec<State>,
    pub probs: Vec<T>,
    /// `‖πP − π‖∞` against the chain it was computed from; `None` for
    /// closed forms and empirical estimates until attached.
    pub residual: Option<f64>,
    pub method: Method,
    /// Power-iteration steps, when applicable.
    pub iterations: Option<usize>,
}

impl<T: Scalar> StationaryDistribution<T> {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, s: &State) -> Option<&T> {
        self.states.iter().position(|x| x == s).map(|i| &self.probs[i])
    }

    pub fn total(&self) -> T {
        self.probs.iter().fold(T::zero(), |a, b| a + b.clone())
    }

    /// Computes and stores the residual against `m`.
    pub fn with_residual(mut self, m: &TransitionMatrix<T>) -> Result<Self> {
        self.check_aligned(m.states())?;
        self.residual = Some(m.residual(&self.probs));
        Ok(self)
    }

    pub fn check_aligned(&self, states: &[State]) -> Result<()> {
        if self.states.as_slice() != states {
            return Err(Error::Misaligned {
                expected: states.len(),
                got: self.states.len(),
            });
        }
        Ok(())
    }

    pub fn to_f64(&self) -> StationaryDistribution<f64> {
        StationaryDistribution {
            states: self.states.clone(),
            probs: self.probs.iter().map(|x| x.to_f64_lossy()).collect(),
            residual: self.residual,
            method: self.method,
            iterations: self.iterations,
        }
    }
}

/// Total-variation distance `½ Σ |a_i − b_i|`.
pub fn tv_distance<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs().to_f64_lossy())
        .sum::<f64>()
}

pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs().to_f64_lossy())
        .fold(0.0, f64::max)
}

/// Solves `π(P − I) = 0` with the last balance equation replaced by
/// `Σπ = 1`, by Gaussian elimination with partial pivoting.
pub fn stationary_direct<T: Scalar>(m: &TransitionMatrix<T>) -> Result<StationaryDistribution<T>> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Singular { column: 0 });
    }
    // a[i][j]: equation i, unknown j. Equation i < n-1 is the balance of state i.
    let mut a = vec![vec![T::zero(); n + 1]; n];
    for j in 0..n {
        for (i, v) in m.row(j) {
            if *i < n - 1 {
                a[*i][j] = a[*i][j].clone() + v.clone();
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate().take(n - 1) {
        row[i] = row[i].clone() - T::one();
    }
    for cell in a[n - 1].iter_mut() {
        *cell = T::one();
    }

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot][col].is_zero() {
            return Err(Error::Singular { column: col });
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        let p = pivot_row[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / p.clone();
            for k in col..=n {
                row[k] = row[k].clone() - factor.clone() * pivot_row[k].clone();
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = a[i][n].clone();
        for k in i + 1..n {
            acc = acc - a[i][k].clone() * x[k].clone();
        }
        x[i] = acc / a[i][i].clone();
    }

    finish(m, x, Method::DirectSolve, None)
}

/// Clamps round-off negatives, checks the residual, wraps the result.
fn finish<T: Scalar>(
    m: &TransitionMatrix<T>,
    mut x: Vec<T>,
    method: Method,
    iterations: Option<usize>,
) -> Result<StationaryDistribution<T>> {
    let tol = T::solver_tolerance();
    for (i, v) in x.iter_mut().enumerate() {
        if *v < T::zero() {
            let mag = v.to_f64_lossy();
            if -mag > tol {
                return Err(Error::NegativeMass { index: i, value: mag });
            }
            *v = T::zero();
        }
    }
    let residual = m.residual(&x);
    if residual > tol {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: tol,
        });
    }
    Ok(StationaryDistribution {
        states: m.states().to_vec(),
        probs: x,
        residual: Some(residual),
        method,
        iterations,
    })
}

/// Iterates `π ← πP` from the uniform vector until `‖πP − π‖₁ < tol`.
pub fn stationary_power<T: Scalar>(
    m: &TransitionMatrix<T>,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryDistribution<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.len();
    let mut pi = vec![T::one() / T::from_int(n as i64); n];
    let mut diff = f64::INFINITY;
    for it in 1..=max_iter {
        let next = m.left_multiply(&pi);
        diff = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
            .sum();
        if diff < tol {
            let residual = m.residual(&pi);
            return Ok(StationaryDistribution {
                states: m.states().to_vec(),
                probs: pi,
                residual: Some(residual),
                method: Method::PowerIteration,
                iterations: Some(it - 1),
            });
        }
        pi = next;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: diff,
        last: pi.iter().map(|x| x.to_f64_lossy()).collect(),
    })
}

/// Uniform law over the `2·k_bar + 1` signed two-way states.
pub fn closed_form_twoway<T: Scalar>(k_bar: u32) -> StationaryDistribution<T> {
    let states: Vec<State> = enumerate_signed_states(k_bar, k_bar)
        .into_iter()
        .map(State::Signed)
        .collect();
    let n = states.len();
    StationaryDistribution {
        states,
        probs: vec![T::one() / T::from_int(n as i64); n],
        residual: None,
        method: Method::ClosedForm,
        iterations: None,
    }
}

/// Rational functions of `p` in the `k_bar = 2` assortative solution:
/// `x2 = A·x3`, `x5 = B·x3`.
pub mod k2 {
    use super::*;

    /// Shared quintic in the denominators of `A` and `B`.
    pub const QUINTIC: [i64; 6] = [1, -6, 17, -30, 28, -18];
    pub const A_NUMERATOR: [i64; 6] = [1, -6, 18, -34, 31, -20];
    pub const B_NUMERATOR: [i64; 8] = [1, -9, 38, -97, 159, -173, 116, -42];
    /// `p² − 2p + 2`.
    pub const QUADRATIC: [i64; 3] = [1, -2, 2];
    pub const X3_DENOMINATOR: [i64; 8] = [19, -163, 670, -1707, 2800, -3079, 2086, -786];

    pub fn a<T: Scalar>(p: &T) -> T {
        horner(&A_NUMERATOR, p) / horner(&QUINTIC, p)
    }

    pub fn b<T: Scalar>(p: &T) -> T {
        horner(&B_NUMERATOR, p) / (horner(&QUINTIC, p) * horner(&QUADRATIC, p))
    }

    pub fn x3<T: Scalar>(p: &T) -> T {
        horner(&QUADRATIC, p) * horner(&QUINTIC, p) / horner(&X3_DENOMINATOR, p)
    }
}

/// Orbit sizes of the six `k_bar = 2` classes
/// `(0,0,0), (1,0,0), (1,1,0), (2,0,0), (2,1,0), (2,2,0)`.
pub const K2_MULTIPLICITY: [usize; 6] = [1, 3, 3, 3, 6, 3];

pub fn k2_classes() -> [AssortativeState; 6] {
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [2, 0, 0], [2, 1, 0], [2, 2, 0]].map(AssortativeState)
}

/// Per-state stationary probabilities `x1..x6` of the six `k_bar = 2`
/// classes, from the closed-form rational solution.
pub fn closed_form_assortative_k2_unknowns<T: Scalar>(p: &Probability<T>) -> [T; 6] {
    let (pp, q) = (p.p().clone(), p.q());
    let a = k2::a(&pp);
    let b = k2::b(&pp);
    let x3 = k2::x3(&pp);
    let two = T::from_int(2);
    let three = T::from_int(3);
    [
        (pp.clone() * a.clone() + q.clone()) * x3.clone(),
        a.clone() * x3.clone(),
        x3.clone(),
        (q.clone() * a + two.clone() * b.clone()) / (two.clone() - pp.clone()) * x3.clone(),
        b.clone() * x3.clone(),
        (pp.clone() + two * q * b) / (three - pp) * x3,
    ]
}

/// Lumped `k_bar = 2` law as class masses (multiplicity × per-state value).
pub fn closed_form_assortative_k2<T: Scalar>(p: &Probability<T>) -> StationaryDistribution<T> {
    let x = closed_form_assortative_k2_unknowns(p);
    StationaryDistribution {
        states: k2_classes().iter().map(|c| State::Assortative(*c)).collect(),
        probs: x
            .iter()
            .zip(K2_MULTIPLICITY)
            .map(|(v, m)| v.clone() * T::from_int(m as i64))
            .collect(),
        residual: None,
        method: Method::ClosedForm,
        iterations: None,
    }
}

/// The seven lumped `k_bar = 2` equations (six balance, one normalization),
/// named by the class whose balance they express.
pub const K2_EQUATION_NAMES: [&str; 7] = [
    "balance (0,0,0)",
    "balance (1,0,0)",
    "balance (1,1,0)",
    "balance (2,0,0)",
    "balance (2,1,0)",
    "balance (2,2,0)",
    "normalization",
];

/// `lhs − rhs` of each of the seven lumped equations at per-state values `x`.
pub fn k2_balance_residuals<T: Scalar>(p: &Probability<T>, x: &[T; 6]) -> [T; 7] {
    let (pp, q) = (p.p().clone(), p.q());
    let c = |n: i64| T::from_int(n);
    let [x1, x2, x3, x4, x5, x6] = x.clone();
    [
        x1.clone() - (pp.clone() * x2.clone() + q.clone() * x3.clone()),
        c(3) * x2.clone()
            - (q.clone() * x1.clone()
                + c(2) * pp.clone() * x3.clone()
                + pp.clone() * x4.clone()
                + c(2) * q.clone() * x5.clone()),
        c(3) * x3.clone()
            - (pp.clone() * x1.clone()
                + c(2) * q.clone() * x2.clone()
                + c(2) * pp.clone() * x5.clone()
                + q.clone() * x6.clone()),
        (c(2) - pp.clone()) * x4.clone() - (q.clone() * x2.clone() + c(2) * x5.clone()),
        (c(3) - pp.clone()) * x5.clone()
            - (pp.clone() * x2.clone() + q.clone() * x3.clone() + q.clone() * x4.clone() + x6.clone()),
        (c(3) - pp.clone()) * x6.clone() - (pp * x3.clone() + c(2) * q * x5.clone()),
        T::one() - (x1 + c(3) * x2 + c(3) * x3 + c(3) * x4 + c(6) * x5 + c(3) * x6),
    ]
}

/// Ratios of the dis-assortative truncated geometric law:
/// `a = q³/(p³ + 3p²q)` (Low side), `b = p³/(3pq² + q³)` (High side).
pub fn disassortative_ratios<T: Scalar>(p: &Probability<T>) -> (T, T) {
    let (pp, q) = (p.p().clone(), p.q());
    let three = T::from_int(3);
    let a = q.powu(3) / (pp.powu(3) + three.clone() * pp.powu(2) * q.clone());
    let b = pp.powu(3) / (three * pp * q.powu(2) + q.powu(3));
    (a, b)
}

/// `Σ_{i=1}^{n} r^i`, with the `r = 1` case summed explicitly.
fn geometric_tail<T: Scalar>(r: &T, n: u32) -> T {
    if r.is_one() {
        T::from_int(n as i64)
    } else {
        r.clone() * (T::one() - r.powu(n)) / (T::one() - r.clone())
    }
}

/// Truncated two-sided geometric law on `k ∈ [−k_low, k_high]`:
/// `π_{−i} = aⁱ π₀`, `π_{+i} = bⁱ π₀`.
pub fn closed_form_disassortative<T: Scalar>(
    p: &Probability<T>,
    k_high: u32,
    k_low: u32,
) -> StationaryDistribution<T> {
    let (a, b) = disassortative_ratios(p);
    let pi0 = T::one() / (T::one() + geometric_tail(&a, k_low) + geometric_tail(&b, k_high));
    let states: Vec<State> = enumerate_signed_states(k_high, k_low)
        .into_iter()
        .map(State::Signed)
        .collect();
    let probs = states
        .iter()
        .map(|s| {
            let k = s.as_signed().unwrap().0;
            if k < 0 {
                a.powu(k.unsigned_abs() as u32) * pi0.clone()
            } else {
                b.powu(k as u32) * pi0.clone()
            }
        })
        .collect();
    StationaryDistribution {
        states,
        probs,
        residual: None,
        method: Method::ClosedForm,
        iterations: None,
    }
}

/// `max_i |π_i P(i,i+1) − π_{i+1} P(i+1,i)|` on a chain indexed in order.
pub fn detailed_balance_residual<T: Scalar>(m: &TransitionMatrix<T>, pi: &[T]) -> f64 {
    (0..m.len().saturating_sub(1))
        .map(|i| {
            let up = pi[i].clone() * m.get(i, i + 1);
            let down = pi[i + 1].clone() * m.get(i + 1, i);
            (up - down).abs().to_f64_lossy()
        })
        .fold(0.0, f64::max)
}

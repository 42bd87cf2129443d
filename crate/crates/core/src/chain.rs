//! State spaces, transition matrices generated from the policy step
//! functions, ergodicity certificates and population-symmetry lumping.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::domain::{
    arrival_probability, enumerate_arrival_pairs, enumerate_arrival_triplets, pair_probability,
    AssortativeState, ChainKind, Probability, SignedQueueState, State, ThresholdConfig,
    PERMUTATIONS,
};
use crate::error::{Error, Result};
use crate::policy;
use crate::scalar::Scalar;

/// Parameters a generated matrix was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams<T> {
    pub kind: ChainKind,
    pub p: Probability<T>,
    pub thresholds: ThresholdConfig,
}

/// Row-stochastic matrix over an indexed state list. Each row is a sparse
/// map `target index -> probability`, sorted by target.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    states: Vec<State>,
    rows: Vec<Vec<(usize, T)>>,
    params: Option<ChainParams<T>>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Wraps explicit rows after checking entries lie in `[0, 1]` and rows
    /// sum to one (exactly for rational scalars).
    pub fn from_rows(
        states: Vec<State>,
        rows: Vec<BTreeMap<usize, T>>,
        params: Option<ChainParams<T>>,
    ) -> Result<Self> {
        if states.len() != rows.len() {
            return Err(Error::Misaligned {
                expected: states.len(),
                got: rows.len(),
            });
        }
        let tol = T::solver_tolerance();
        let n = states.len();
        let mut sparse = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let mut sum = T::zero();
            for (&j, v) in &row {
                if j >= n || *v < T::zero() || *v > T::one() {
                    return Err(Error::InvalidParams(format!(
                        "row {i}: entry ({j}, {v}) out of range"
                    )));
                }
                sum = sum + v.clone();
            }
            if (sum.clone() - T::one()).abs().to_f64_lossy() > tol {
                return Err(Error::InvalidParams(format!("row {i} sums to {sum}")));
            }
            sparse.push(row.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        }
        Ok(Self {
            states,
            rows: sparse,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn params(&self) -> Option<&ChainParams<T>> {
        self.params.as_ref()
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .binary_search_by_key(&j, |(k, _)| *k)
            .map(|pos| self.rows[i][pos].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn index_of(&self, s: &State) -> Option<usize> {
        self.states.binary_search(s).ok().or_else(|| self.states.iter().position(|x| x == s))
    }

    /// `x P` for a row vector `x`.
    pub fn left_multiply(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if x[i].is_zero() {
                continue;
            }
            for (j, v) in row {
                out[*j] = out[*j].clone() + x[i].clone() * v.clone();
            }
        }
        out
    }

    /// `‖xP − x‖∞`.
    pub fn residual(&self, x: &[T]) -> f64 {
        self.left_multiply(x)
            .iter()
            .zip(x)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }

    /// True when every nonzero entry connects adjacent indices.
    pub fn is_tridiagonal(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|(j, _)| i.abs_diff(*j) <= 1))
    }

    fn positive_successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i]
            .iter()
            .filter(|(_, v)| *v > T::zero())
            .map(|(j, _)| *j)
    }
}

/// All `(a1, a2, a3)` in `[0, k_bar]^3` with a zero coordinate, lexicographic.
pub fn enumerate_assortative_states(k_bar: u32) -> Result<Vec<AssortativeState>> {
    ThresholdConfig::symmetric(k_bar).validate(ChainKind::Assortative)?;
    let mut out = Vec::with_capacity(3 * (k_bar * k_bar + k_bar) as usize + 1);
    for a1 in 0..=k_bar {
        for a2 in 0..=k_bar {
            for a3 in 0..=k_bar {
                if a1.min(a2).min(a3) == 0 {
                    out.push(AssortativeState([a1, a2, a3]));
                }
            }
        }
    }
    Ok(out)
}

/// `-lower..=upper`, ascending.
pub fn enumerate_signed_states(upper: u32, lower: u32) -> Vec<SignedQueueState> {
    (-(lower as i64)..=upper as i64).map(SignedQueueState).collect()
}

fn accumulate<T: Scalar>(
    states: Vec<State>,
    params: ChainParams<T>,
    mut transitions: impl FnMut(&State) -> Result<Vec<(State, T)>>,
) -> Result<TransitionMatrix<T>> {
    let index: HashMap<State, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut rows = Vec::with_capacity(states.len());
    for s in &states {
        let mut row: BTreeMap<usize, T> = BTreeMap::new();
        for (next, prob) in transitions(s)? {
            let j = *index.get(&next).ok_or_else(|| {
                Error::InvalidState(format!("step left the state space: {s} -> {next}"))
            })?;
            let slot = row.entry(j).or_insert_with(T::zero);
            *slot = slot.clone() + prob;
        }
        rows.push(row);
    }
    TransitionMatrix::from_rows(states, rows, Some(params))
}

pub fn build_twoway_matrix<T: Scalar>(p: &Probability<T>, k_bar: u32) -> Result<TransitionMatrix<T>> {
    let states = enumerate_signed_states(k_bar, k_bar)
        .into_iter()
        .map(State::Signed)
        .collect();
    let params = ChainParams {
        kind: ChainKind::TwoWay,
        p: p.clone(),
        thresholds: ThresholdConfig::symmetric(k_bar),
    };
    accumulate(states, params, |s| {
        let k = s.as_signed().unwrap();
        enumerate_arrival_pairs()
            .iter()
            .map(|pr| {
                Ok((
                    State::Signed(policy::twoway_step(k, *pr, k_bar)?),
                    pair_probability(pr, p),
                ))
            })
            .collect()
    })
}

pub fn build_assortative_matrix<T: Scalar>(
    p: &Probability<T>,
    k_bar: u32,
) -> Result<TransitionMatrix<T>> {
    let states = enumerate_assortative_states(k_bar)?
        .into_iter()
        .map(State::Assortative)
        .collect();
    let params = ChainParams {
        kind: ChainKind::Assortative,
        p: p.clone(),
        thresholds: ThresholdConfig::symmetric(k_bar),
    };
    accumulate(states, params, |s| {
        let a = s.as_assortative().unwrap();
        enumerate_arrival_triplets()
            .iter()
            .map(|t| {
                let (next, _) = policy::assortative_step(a, *t, k_bar)?;
                Ok((State::Assortative(next), arrival_probability(t, p)))
            })
            .collect()
    })
}

pub fn build_disassortative_matrix<T: Scalar>(
    p: &Probability<T>,
    k_high: u32,
    k_low: u32,
) -> Result<TransitionMatrix<T>> {
    let states = enumerate_signed_states(k_high, k_low)
        .into_iter()
        .map(State::Signed)
        .collect();
    let params = ChainParams {
        kind: ChainKind::Disassortative,
        p: p.clone(),
        thresholds: ThresholdConfig::disassortative(k_high, k_low),
    };
    accumulate(states, params, |s| {
        let k = s.as_signed().unwrap();
        enumerate_arrival_triplets()
            .iter()
            .map(|t| {
                Ok((
                    State::Signed(policy::disassortative_step(k, *t, k_high, k_low)?),
                    arrival_probability(t, p),
                ))
            })
            .collect()
    })
}

/// Generates the transition matrix of the given model. The two-way and
/// assortative models read `thresholds.k_bar`; the dis-assortative model
/// reads `k_high` and `k_low`.
pub fn build_matrix<T: Scalar>(
    kind: ChainKind,
    p: &Probability<T>,
    thresholds: ThresholdConfig,
) -> Result<TransitionMatrix<T>> {
    thresholds.validate(kind)?;
    match kind {
        ChainKind::TwoWay => build_twoway_matrix(p, thresholds.k_bar),
        ChainKind::Assortative => build_assortative_matrix(p, thresholds.k_bar),
        ChainKind::Disassortative => {
            build_disassortative_matrix(p, thresholds.k_high, thresholds.k_low)
        }
    }
}

/// Evidence attached to an [`ErgodicityReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Closed walk of positive-probability steps that visits every state,
    /// starting and ending at index 0.
    Cycle(Vec<usize>),
    /// States not reachable from `from` (or that cannot reach it).
    Unreachable { from: usize, states: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErgodicityReport {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub positive_diagonal: bool,
    /// Period of the chain, when irreducible.
    pub period: Option<usize>,
    pub witness: Witness,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

fn bfs(n: usize, start: usize, succ: impl Fn(usize) -> Vec<usize>) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut dist = vec![None; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::from([start]);
    dist[start] = Some(0);
    while let Some(u) = queue.pop_front() {
        for v in succ(u) {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Irreducibility by forward and backward search from state 0; period from
/// BFS levels; aperiodicity is also witnessed by a positive diagonal.
pub fn check_ergodicity<T: Scalar>(m: &TransitionMatrix<T>) -> ErgodicityReport {
    let n = m.len();
    let positive_diagonal = (0..n).all(|i| m.get(i, i) > T::zero());
    if n == 0 {
        return ErgodicityReport {
            irreducible: false,
            aperiodic: false,
            positive_diagonal,
            period: None,
            witness: Witness::Unreachable {
                from: 0,
                states: vec![],
            },
        };
    }
    let forward = |u: usize| m.positive_successors(u).collect::<Vec<_>>();
    let mut predecessors = vec![Vec::new(); n];
    for u in 0..n {
        for v in m.positive_successors(u) {
            predecessors[v].push(u);
        }
    }
    let (dist, _) = bfs(n, 0, forward);
    let (back_dist, _) = bfs(n, 0, |u| predecessors[u].clone());

    let unreachable: Vec<usize> = (0..n).filter(|&i| dist[i].is_none()).collect();
    let cannot_return: Vec<usize> = (0..n).filter(|&i| back_dist[i].is_none()).collect();
    if !unreachable.is_empty() || !cannot_return.is_empty() {
        let mut states = unreachable;
        states.extend(cannot_return);
        states.sort_unstable();
        states.dedup();
        return ErgodicityReport {
            irreducible: false,
            aperiodic: positive_diagonal,
            positive_diagonal,
            period: None,
            witness: Witness::Unreachable { from: 0, states },
        };
    }

    let mut period = 0;
    for u in 0..n {
        for v in m.positive_successors(u) {
            let (du, dv) = (dist[u].unwrap(), dist[v].unwrap());
            period = gcd(period, (du + 1).abs_diff(dv));
        }
    }

    ErgodicityReport {
        irreducible: true,
        aperiodic: positive_diagonal || period == 1,
        positive_diagonal,
        period: Some(period),
        witness: Witness::Cycle(covering_walk(m)),
    }
}

/// Concatenated shortest paths 0 -> first unvisited -> ... -> 0.
fn covering_walk<T: Scalar>(m: &TransitionMatrix<T>) -> Vec<usize> {
    let n = m.len();
    let mut walk = vec![0];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut at = 0;
    let goto = |from: usize, to: usize| -> Vec<usize> {
        let (_, parent) = bfs(n, from, |u| m.positive_successors(u).collect());
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur].expect("irreducible chain");
            path.push(cur);
        }
        path.reverse();
        path
    };
    for target in 0..n {
        if visited[target] {
            continue;
        }
        let path = goto(at, target);
        for &v in &path[1..] {
            visited[v] = true;
            walk.push(v);
        }
        at = target;
    }
    if at != 0 || n == 1 {
        walk.extend(goto(at, 0).into_iter().skip(1));
        if n == 1 {
            walk.push(0);
        }
    }
    walk
}

/// Quotient of an assortative chain by the six population permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedChain<T> {
    /// Sorted-descending representatives, lexicographic.
    pub classes: Vec<AssortativeState>,
    pub multiplicity: Vec<usize>,
    pub matrix: TransitionMatrix<T>,
    /// Full state index -> class index.
    pub class_of: Vec<usize>,
}

impl<T: Scalar> LumpedChain<T> {
    /// Spreads class masses evenly over each orbit.
    pub fn expand(&self, class_mass: &[T]) -> Vec<T> {
        self.class_of
            .iter()
            .map(|&c| class_mass[c].clone() / T::from_int(self.multiplicity[c] as i64))
            .collect()
    }

    /// Per-state probability of each class (class mass / orbit size).
    pub fn per_state(&self, class_mass: &[T]) -> Vec<T> {
        class_mass
            .iter()
            .zip(&self.multiplicity)
            .map(|(x, &m)| x.clone() / T::from_int(m as i64))
            .collect()
    }
}

/// Lumps by population symmetry and verifies strong lumpability: the
/// aggregated row is recomputed from every member of a class and must agree.
pub fn lump_by_symmetry<T: Scalar>(m: &TransitionMatrix<T>) -> Result<LumpedChain<T>> {
    let full: Vec<AssortativeState> = m
        .states()
        .iter()
        .map(|s| s.as_assortative().ok_or(Error::NotAssortative))
        .collect::<Result<_>>()?;

    let mut classes: Vec<AssortativeState> = full.iter().map(|s| s.canonical()).collect();
    classes.sort_unstable();
    classes.dedup();
    let class_index: HashMap<AssortativeState, usize> =
        classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let class_of: Vec<usize> = full.iter().map(|s| class_index[&s.canonical()]).collect();
    let mut multiplicity = vec![0usize; classes.len()];
    for &c in &class_of {
        multiplicity[c] += 1;
    }

    let aggregated = |i: usize| {
        let mut row = vec![T::zero(); classes.len()];
        for (j, v) in m.row(i) {
            let c = class_of[*j];
            row[c] = row[c].clone() + v.clone();
        }
        row
    };

    let tol = T::solver_tolerance() * 1e-3;
    let mut rows = Vec::with_capacity(classes.len());
    for (ci, rep) in classes.iter().enumerate() {
        let rep_idx = m
            .index_of(&State::Assortative(*rep))
            .ok_or_else(|| Error::InvalidState(format!("class representative {rep} missing")))?;
        let reference = aggregated(rep_idx);
        for member in (0..full.len()).filter(|&i| class_of[i] == ci) {
            let other = aggregated(member);
            let discrepancy = reference
                .iter()
                .zip(&other)
                .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
                .fold(0.0, f64::max);
            if discrepancy > tol {
                return Err(Error::NotLumpable {
                    class: ci,
                    member,
                    discrepancy,
                });
            }
        }
        rows.push(
            reference
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .collect::<BTreeMap<_, _>>(),
        );
    }

    let matrix = TransitionMatrix::from_rows(
        classes.iter().map(|c| State::Assortative(*c)).collect(),
        rows,
        m.params().cloned(),
    )?;
    Ok(LumpedChain {
        classes,
        multiplicity,
        matrix,
        class_of,
    })
}

/// Checks `P(σ·s, σ·t) = P(s, t)` for every pair and permutation; returns
/// the largest discrepancy.
pub fn permutation_discrepancy<T: Scalar>(m: &TransitionMatrix<T>) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..m.len() {
        let s = m.states()[i].as_assortative().ok_or(Error::NotAssortative)?;
        for perm in PERMUTATIONS {
            let pi = m
                .index_of(&State::Assortative(s.permuted(perm)))
                .ok_or_else(|| Error::InvalidState("permuted state missing".into()))?;
            for j in 0..m.len() {
                let t = m.states()[j].as_assortative().unwrap();
                let pj = m.index_of(&State::Assortative(t.permuted(perm))).unwrap();
                let d = (m.get(i, j) - m.get(pi, pj)).abs().to_f64_lossy();
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}

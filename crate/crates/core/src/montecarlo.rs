//! Full-market simulation with explicit High and Low queues per population.
//!
//! The reduced chains only track High queues (or a signed difference). The
//! simulator keeps every waiting agent and checks after each period that
//! the reduced step in [`crate::policy`] is an exact projection of the full
//! dynamics, along with the queue-balance laws.
//!
//! Arrivals are drawn with ChaCha8 (`rand_chacha`) seeded from a `u64`
//! through `SeedableRng::seed_from_u64`; each member is High when
//! `gen_bool(p)` is true, populations drawn in index order. The stream is
//! portable, so reports are reproducible across platforms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{enumerate_assortative_states, enumerate_signed_states};
use crate::domain::{
    ArrivalPair, ArrivalTriplet, AssortativeState, ChainKind, Composition, Label,
    SignedQueueState, State, ThresholdConfig,
};
use crate::error::{Error, Result};
use crate::policy::{self, Member, Origin, Team, TeamReport};
use crate::solve::{Method, StationaryDistribution};

/// Waiting agents per population, by type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarketState {
    pub high: Vec<u32>,
    pub low: Vec<u32>,
}

impl MarketState {
    fn empty(arity: usize) -> Self {
        Self {
            high: vec![0; arity],
            low: vec![0; arity],
        }
    }

    fn totals(&self) -> Vec<u32> {
        self.high.iter().zip(&self.low).map(|(h, l)| h + l).collect()
    }
}

/// Full-queue market under one of the threshold policies.
#[derive(Debug, Clone)]
pub struct Market {
    kind: ChainKind,
    thresholds: ThresholdConfig,
    state: MarketState,
    period: u64,
    checks: u64,
}

impl Market {
    pub fn new(kind: ChainKind, thresholds: ThresholdConfig) -> Result<Self> {
        thresholds.validate(kind)?;
        Ok(Self {
            kind,
            thresholds,
            state: MarketState::empty(kind.arity()),
            period: 0,
            checks: 0,
        })
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    /// Number of individual invariant checks passed so far.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    /// Projection onto the reduced chain state.
    pub fn reduced(&self) -> State {
        match self.kind {
            ChainKind::Assortative => State::Assortative(AssortativeState([
                self.state.high[0],
                self.state.high[1],
                self.state.high[2],
            ])),
            ChainKind::Disassortative => {
                State::Signed(SignedQueueState(self.state.high[0] as i64 - self.state.low[0] as i64))
            }
            ChainKind::TwoWay => {
                State::Signed(SignedQueueState(self.state.high[0] as i64 - self.state.high[1] as i64))
            }
        }
    }

    fn violation(&self, detail: String) -> Error {
        Error::InvariantViolation {
            period: self.period,
            detail,
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) -> Result<()> {
        if ok {
            self.checks += 1;
            Ok(())
        } else {
            Err(self.violation(detail()))
        }
    }

    /// Advances one period with the given arrivals (one label per
    /// population) and verifies every invariant.
    pub fn step(&mut self, arrivals: &[Label]) -> Result<TeamReport> {
        if arrivals.len() != self.kind.arity() {
            return Err(Error::Misaligned {
                expected: self.kind.arity(),
                got: arrivals.len(),
            });
        }
        self.period += 1;
        let before = self.state.clone();
        let reduced_before = self.reduced();

        let report = match self.kind {
            ChainKind::Assortative => self.assortative_period(arrivals),
            ChainKind::Disassortative => self.disassortative_period(arrivals),
            ChainKind::TwoWay => self.twoway_period(arrivals),
        };

        self.check_conservation(&before, arrivals, &report)?;
        self.check_structure()?;
        self.check_projection(reduced_before, arrivals)?;
        Ok(report)
    }

    fn check_conservation(&mut self, before: &MarketState, arrivals: &[Label], report: &TeamReport) -> Result<()> {
        let arity = self.kind.arity();
        self.check(report.teams.iter().all(|t| t.members.len() == arity), || {
            "team without one member per population".into()
        })?;
        for i in 0..arity {
            for label in [Label::High, Label::Low] {
                let used = report
                    .teams
                    .iter()
                    .filter(|t| t.members[i].label == label)
                    .count() as u32;
                let from_queue = report
                    .teams
                    .iter()
                    .filter(|t| t.members[i].label == label && t.members[i].origin == Some(Origin::Queue))
                    .count() as u32;
                let (pre, post) = match label {
                    Label::High => (before.high[i], self.state.high[i]),
                    Label::Low => (before.low[i], self.state.low[i]),
                };
                let arrived = (arrivals[i] == label) as u32;
                self.check(pre + arrived == post + used, || {
                    format!("population {i} {label:?}: {pre} + {arrived} != {post} + {used}")
                })?;
                self.check(from_queue <= pre, || {
                    format!("population {i} {label:?}: {from_queue} queued members used, {pre} waiting")
                })?;
            }
        }
        Ok(())
    }

    fn check_structure(&mut self) -> Result<()> {
        let totals = self.state.totals();
        let s = self.state.clone();
        self.check(totals.iter().all(|&t| t == totals[0]), || {
            format!("unbalanced queues {s:?}")
        })?;
        match self.kind {
            ChainKind::Assortative => {
                let k_bar = self.thresholds.k_bar;
                let max = *s.high.iter().max().unwrap();
                let min = *s.high.iter().min().unwrap();
                self.check(min == 0 && max <= k_bar, || {
                    format!("High queues {:?} off the cube faces (k_bar = {k_bar})", s.high)
                })?;
                self.check((0..3).all(|i| s.low[i] == max - s.high[i]), || {
                    format!("Low queues {:?} break low_i = max(high) - high_i for {:?}", s.low, s.high)
                })?;
            }
            ChainKind::Disassortative => {
                let (kh, kl) = (self.thresholds.k_high, self.thresholds.k_low);
                self.check(
                    s.high.iter().all(|&h| h == s.high[0]) && s.low.iter().all(|&l| l == s.low[0]),
                    || format!("waiting stock is not whole triplets: {s:?}"),
                )?;
                self.check(s.high[0] == 0 || s.low[0] == 0, || {
                    format!("both High and Low triplets waiting: {s:?}")
                })?;
                self.check(s.high[0] <= kh && s.low[0] <= kl, || {
                    format!("threshold exceeded: {s:?}")
                })?;
            }
            ChainKind::TwoWay => {
                let k_bar = self.thresholds.k_bar;
                // (H, L) on side one, (h, l) on side two.
                self.check(s.high[0].min(s.high[1]) == 0 && s.low[0].min(s.low[1]) == 0, || {
                    format!("matchable pair left waiting: {s:?}")
                })?;
                self.check(s.high[0] <= k_bar && s.high[1] <= k_bar, || {
                    format!("threshold exceeded: {s:?}")
                })?;
            }
        }
        Ok(())
    }

    fn check_projection(&mut self, before: State, arrivals: &[Label]) -> Result<()> {
        let predicted = match (self.kind, before) {
            (ChainKind::Assortative, State::Assortative(s)) => State::Assortative(
                policy::assortative_step(s, ArrivalTriplet([arrivals[0], arrivals[1], arrivals[2]]), self.thresholds.k_bar)?.0,
            ),
            (ChainKind::Disassortative, State::Signed(k)) => State::Signed(policy::disassortative_step(
                k,
                ArrivalTriplet([arrivals[0], arrivals[1], arrivals[2]]),
                self.thresholds.k_high,
                self.thresholds.k_low,
            )?),
            (ChainKind::TwoWay, State::Signed(k)) => State::Signed(policy::twoway_step(
                k,
                ArrivalPair([arrivals[0], arrivals[1]]),
                self.thresholds.k_bar,
            )?),
            _ => unreachable!("reduced state shape follows the kind"),
        };
        let actual = self.reduced();
        self.check(predicted == actual, || {
            format!("projection mismatch: reduced step gives {predicted}, market gives {actual}")
        })
    }

    /// FIFO origin for the next member of `label` taken from population `i`.
    fn origin(waiting_before: u32, taken: &mut u32) -> Option<Origin> {
        let o = if *taken < waiting_before {
            Origin::Queue
        } else {
            Origin::Arrival
        };
        *taken += 1;
        Some(o)
    }

    fn assortative_period(&mut self, arrivals: &[Label]) -> TeamReport {
        let k_bar = self.thresholds.k_bar;
        let s = &mut self.state;
        let (high_before, low_before) = (s.high.clone(), s.low.clone());
        let mut taken_high = [0u32; 3];
        let mut taken_low = [0u32; 3];
        for (i, l) in arrivals.iter().enumerate() {
            match l {
                Label::High => s.high[i] += 1,
                Label::Low => s.low[i] += 1,
            }
        }
        let mut report = TeamReport::default();

        let all_high = *s.high.iter().min().unwrap();
        for _ in 0..all_high {
            let members = (0..3)
                .map(|i| {
                    s.high[i] -= 1;
                    Member {
                        label: Label::High,
                        origin: Self::origin(high_before[i], &mut taken_high[i]),
                    }
                })
                .collect();
            report.teams.push(Team { members, forced: false });
        }

        if s.high.iter().any(|&h| h > k_bar) {
            let members = (0..3)
                .map(|i| {
                    if s.high[i] > 0 {
                        s.high[i] -= 1;
                        Member {
                            label: Label::High,
                            origin: Self::origin(high_before[i], &mut taken_high[i]),
                        }
                    } else {
                        s.low[i] -= 1;
                        Member {
                            label: Label::Low,
                            origin: Self::origin(low_before[i], &mut taken_low[i]),
                        }
                    }
                })
                .collect();
            report.teams.push(Team { members, forced: true });
        }

        let all_low = *s.low.iter().min().unwrap();
        for _ in 0..all_low {
            let members = (0..3)
                .map(|i| {
                    s.low[i] -= 1;
                    Member {
                        label: Label::Low,
                        origin: Self::origin(low_before[i], &mut taken_low[i]),
                    }
                })
                .collect();
            report.teams.push(Team { members, forced: false });
        }
        report
    }

    fn disassortative_period(&mut self, arrivals: &[Label]) -> TeamReport {
        let (kh, kl) = (self.thresholds.k_high, self.thresholds.k_low);
        let s = &mut self.state;
        let mut report = TeamReport::default();
        let arrived = |label: Label| Member {
            label,
            origin: Some(Origin::Arrival),
        };
        let queued = |label: Label| Member {
            label,
            origin: Some(Origin::Queue),
        };

        let waiting = if s.high[0] > 0 {
            Some(Label::High)
        } else if s.low[0] > 0 {
            Some(Label::Low)
        } else {
            None
        };
        let opposite: Vec<usize> = match waiting {
            Some(q) => (0..3).filter(|&i| arrivals[i] != q).collect(),
            None => vec![],
        };
        let mixed_arrival = arrivals.iter().any(|l| l.is_high()) && arrivals.iter().any(|l| !l.is_high());

        match waiting {
            Some(q) if opposite.len() >= 2 => {
                // Two mixed teams from one waiting triplet plus the arrival.
                let first = opposite[0];
                let team1 = (0..3)
                    .map(|i| if i == first { arrived(arrivals[i]) } else { queued(q) })
                    .collect();
                let team2 = (0..3)
                    .map(|i| if i == first { queued(q) } else { arrived(arrivals[i]) })
                    .collect();
                report.teams.push(Team { members: team1, forced: false });
                report.teams.push(Team { members: team2, forced: false });
                let queue = if q.is_high() { &mut s.high } else { &mut s.low };
                for x in queue.iter_mut() {
                    *x -= 1;
                }
            }
            _ if mixed_arrival => {
                report.teams.push(Team {
                    members: arrivals.iter().map(|&l| arrived(l)).collect(),
                    forced: false,
                });
            }
            _ => {
                // Homogeneous arrival joins (or starts) the waiting stock.
                let label = arrivals[0];
                let (queue, limit) = if label.is_high() {
                    (&mut s.high, kh)
                } else {
                    (&mut s.low, kl)
                };
                let had = queue[0];
                for x in queue.iter_mut() {
                    *x += 1;
                }
                if queue[0] > limit {
                    let member = if had > 0 { queued(label) } else { arrived(label) };
                    report.teams.push(Team {
                        members: vec![member; 3],
                        forced: true,
                    });
                    for x in queue.iter_mut() {
                        *x -= 1;
                    }
                }
            }
        }
        report
    }

    fn twoway_period(&mut self, arrivals: &[Label]) -> TeamReport {
        let k_bar = self.thresholds.k_bar;
        let s = &mut self.state;
        let (high_before, low_before) = (s.high.clone(), s.low.clone());
        let mut taken_high = [0u32; 2];
        let mut taken_low = [0u32; 2];
        for (i, l) in arrivals.iter().enumerate() {
            match l {
                Label::High => s.high[i] += 1,
                Label::Low => s.low[i] += 1,
            }
        }
        let mut report = TeamReport::default();
        let mut pair = |s: &mut MarketState, a: Label, b: Label, forced: bool| {
            let mut take = |i: usize, label: Label| {
                let (queue, before, taken) = match label {
                    Label::High => (&mut s.high, &high_before, &mut taken_high),
                    Label::Low => (&mut s.low, &low_before, &mut taken_low),
                };
                queue[i] -= 1;
                Member {
                    label,
                    origin: Self::origin(before[i], &mut taken[i]),
                }
            };
            let members = vec![take(0, a), take(1, b)];
            report.teams.push(Team { members, forced });
        };
        let hh = s.high[0].min(s.high[1]);
        for _ in 0..hh {
            pair(s, Label::High, Label::High, false);
        }
        let ll = s.low[0].min(s.low[1]);
        for _ in 0..ll {
            pair(s, Label::Low, Label::Low, false);
        }
        while s.high[0] > k_bar {
            pair(s, Label::High, Label::Low, true);
        }
        while s.high[1] > k_bar {
            pair(s, Label::Low, Label::High, true);
        }
        report
    }
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub kind: ChainKind,
    pub p: f64,
    pub thresholds: ThresholdConfig,
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Batches for batch-means standard errors of team rates.
    pub batches: u64,
}

impl SimulationConfig {
    /// Burn-in defaults to 10% of `steps`, 100 batches.
    pub fn new(kind: ChainKind, p: f64, thresholds: ThresholdConfig, steps: u64, seed: u64) -> Self {
        Self {
            kind,
            p,
            thresholds,
            steps,
            burn_in: steps / 10,
            seed,
            batches: 100,
        }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidProbability(self.p.to_string()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::InvalidParams(format!(
                "steps ({}) must exceed burn-in ({})",
                self.steps, self.burn_in
            )));
        }
        if self.batches == 0 || self.batches > self.steps - self.burn_in {
            return Err(Error::InvalidParams(format!("bad batch count {}", self.batches)));
        }
        self.thresholds.validate(self.kind)
    }
}

/// Mean per-period rate and its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    /// Post-step reduced states observed after burn-in.
    pub occupancy: BTreeMap<State, u64>,
    pub empirical: StationaryDistribution<f64>,
    /// Teams formed after burn-in, by ordered composition.
    pub team_counts: BTreeMap<Composition, u64>,
    pub forced_teams: u64,
    /// Per-batch team counts; batches are contiguous, equal length except
    /// the last, which absorbs the remainder.
    pub batch_team_counts: Vec<BTreeMap<Composition, u64>>,
    pub batch_lengths: Vec<u64>,
    pub invariant_checks: u64,
}

impl SimulationReport {
    pub fn recorded(&self) -> u64 {
        self.config.steps - self.config.burn_in
    }

    pub fn team_rate_estimates(&self) -> BTreeMap<Composition, RateEstimate> {
        let b = self.batch_lengths.len() as f64;
        let all: Vec<Composition> = Composition::all(self.config.kind.arity());
        all.into_iter()
            .map(|c| {
                let rates: Vec<f64> = self
                    .batch_team_counts
                    .iter()
                    .zip(&self.batch_lengths)
                    .map(|(counts, &len)| *counts.get(&c).unwrap_or(&0) as f64 / len as f64)
                    .collect();
                let mean = *self.team_counts.get(&c).unwrap_or(&0) as f64 / self.recorded() as f64;
                let bar = rates.iter().sum::<f64>() / b;
                let var = rates.iter().map(|r| (r - bar).powi(2)).sum::<f64>() / (b - 1.0).max(1.0);
                (c, RateEstimate { mean, std_error: (var / b).sqrt() })
            })
            .collect()
    }
}

/// State list the empirical distribution is aligned to.
pub fn reduced_states(kind: ChainKind, thresholds: ThresholdConfig) -> Result<Vec<State>> {
    thresholds.validate(kind)?;
    Ok(match kind {
        ChainKind::Assortative => enumerate_assortative_states(thresholds.k_bar)?
            .into_iter()
            .map(State::Assortative)
            .collect(),
        ChainKind::Disassortative => enumerate_signed_states(thresholds.k_high, thresholds.k_low)
            .into_iter()
            .map(State::Signed)
            .collect(),
        ChainKind::TwoWay => enumerate_signed_states(thresholds.k_bar, thresholds.k_bar)
            .into_iter()
            .map(State::Signed)
            .collect(),
    })
}

/// Normalized occupancy aligned to `states`; unvisited states get zero.
pub fn empirical_distribution(
    occupancy: &BTreeMap<State, u64>,
    states: &[State],
) -> Result<StationaryDistribution<f64>> {
    let total: u64 = occupancy.values().sum();
    if total == 0 {
        return Err(Error::InvalidParams("no recorded periods".into()));
    }
    if let Some(s) = occupancy.keys().find(|s| !states.contains(s)) {
        return Err(Error::InvalidState(format!("{s} is not in the state list")));
    }
    Ok(StationaryDistribution {
        states: states.to_vec(),
        probs: states
            .iter()
            .map(|s| *occupancy.get(s).unwrap_or(&0) as f64 / total as f64)
            .collect(),
        residual: None,
        method: Method::Empirical,
        iterations: None,
    })
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let states = reduced_states(config.kind, config.thresholds)?;
    let mut market = Market::new(config.kind, config.thresholds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let arity = config.kind.arity();

    let recorded = config.steps - config.burn_in;
    let batch_len = recorded / config.batches;
    let mut batch_lengths = vec![batch_len; config.batches as usize];
    *batch_lengths.last_mut().unwrap() += recorded % config.batches;

    let mut occupancy: BTreeMap<State, u64> = BTreeMap::new();
    let mut team_counts: BTreeMap<Composition, u64> = BTreeMap::new();
    let mut batch_team_counts = vec![BTreeMap::new(); config.batches as usize];
    let mut forced_teams = 0;
    let mut arrivals = vec![Label::High; arity];

    for period in 0..config.steps {
        for a in arrivals.iter_mut() {
            *a = if rng.gen_bool(config.p) { Label::High } else { Label::Low };
        }
        let report = market.step(&arrivals)?;
        if period < config.burn_in {
            continue;
        }
        *occupancy.entry(market.reduced()).or_insert(0) += 1;
        let batch = (((period - config.burn_in) / batch_len.max(1)) as usize).min(config.batches as usize - 1);
        for team in &report.teams {
            let c = team.composition();
            *team_counts.entry(c.clone()).or_insert(0) += 1;
            *batch_team_counts[batch].entry(c).or_insert(0) += 1;
            forced_teams += team.forced as u64;
        }
    }

    let empirical = empirical_distribution(&occupancy, &states)?;
    Ok(SimulationReport {
        config: config.clone(),
        occupancy,
        empirical,
        team_counts,
        forced_teams,
        batch_team_counts,
        batch_lengths,
        invariant_checks: market.checks(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{High as H, Low as L};

    #[test]
    fn assortative_market_follows_low_queue_law() {
        let mut m = Market::new(ChainKind::Assortative, ThresholdConfig::symmetric(2)).unwrap();
        for arr in [[H, L, L], [H, L, L], [H, H, L], [L, L, H], [L, L, L], [H, L, H], [H, H, H]] {
            m.step(&arr).unwrap();
        }
        let s = m.state();
        let max = *s.high.iter().max().unwrap();
        for i in 0..3 {
            assert_eq!(s.low[i], max - s.high[i]);
        }
    }

    #[test]
    fn forced_team_uses_waiting_low() {
        let mut m = Market::new(ChainKind::Assortative, ThresholdConfig::symmetric(1)).unwrap();
        m.step(&[H, L, L]).unwrap();
        assert_eq!(m.state().low, vec![0, 1, 1]);
        let r = m.step(&[H, L, L]).unwrap();
        // Excess H1 with two queued Lows; then arriving Lows cannot all match.
        assert_eq!(r.teams.len(), 1);
        assert!(r.teams[0].forced);
        assert_eq!(r.teams[0].composition().to_string(), "HLL");
        assert_eq!(r.teams[0].members[1].origin, Some(Origin::Queue));
        assert_eq!(m.reduced(), State::Assortative(AssortativeState([1, 0, 0])));
    }

    #[test]
    fn disassortative_market_consumes_waiting_triplets() {
        let mut m = Market::new(ChainKind::Disassortative, ThresholdConfig::disassortative(2, 2)).unwrap();
        m.step(&[L, L, L]).unwrap();
        m.step(&[L, L, L]).unwrap();
        assert_eq!(m.reduced(), State::Signed(SignedQueueState(-2)));
        let r = m.step(&[H, H, L]).unwrap();
        assert_eq!(r.teams.len(), 2);
        assert_eq!(m.reduced(), State::Signed(SignedQueueState(-1)));
        let r = m.step(&[L, L, L]).unwrap();
        assert!(r.teams.is_empty());
        let r = m.step(&[L, L, L]).unwrap();
        assert_eq!(r.forced_count(), 1);
        assert_eq!(m.reduced(), State::Signed(SignedQueueState(-2)));
    }

    #[test]
    fn twoway_market_tracks_signed_queue() {
        let mut m = Market::new(ChainKind::TwoWay, ThresholdConfig::symmetric(1)).unwrap();
        m.step(&[H, L]).unwrap();
        assert_eq!(m.reduced(), State::Signed(SignedQueueState(1)));
        let r = m.step(&[H, L]).unwrap();
        assert_eq!(r.forced_count(), 1);
        assert_eq!(r.teams[0].composition().to_string(), "Hl");
        let r = m.step(&[L, H]).unwrap();
        assert_eq!(r.teams.len(), 2);
        assert_eq!(m.reduced(), State::Signed(SignedQueueState(0)));
        assert_eq!(m.state().totals(), vec![0, 0]);
    }

    #[test]
    fn wrong_arity_rejected() {
        let mut m = Market::new(ChainKind::TwoWay, ThresholdConfig::symmetric(1)).unwrap();
        assert!(m.step(&[H, L, L]).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = SimulationConfig::new(ChainKind::Assortative, 0.4, ThresholdConfig::symmetric(2), 20_000, 7);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = SimulationConfig { seed: 8, ..cfg.clone() };
        assert_ne!(simulate(&cfg).unwrap().occupancy, simulate(&other).unwrap().occupancy);
    }

    #[test]
    fn occupancy_adds_up() {
        let cfg = SimulationConfig::new(ChainKind::Disassortative, 0.5, ThresholdConfig::disassortative(1, 1), 10_001, 3);
        let r = simulate(&cfg).unwrap();
        assert_eq!(r.config.burn_in, 1000);
        assert_eq!(r.occupancy.values().sum::<u64>(), 9001);
        assert_eq!(r.batch_lengths.iter().sum::<u64>(), 9001);
        assert!((r.empirical.total() - 1.0).abs() < 1e-12);
        assert!(r.invariant_checks > 0);
    }

    #[test]
    fn empirical_point_mass() {
        let s = State::Signed(SignedQueueState(0));
        let states = [State::Signed(SignedQueueState(-1)), s, State::Signed(SignedQueueState(1))];
        let d = empirical_distribution(&BTreeMap::from([(s, 1)]), &states).unwrap();
        assert_eq!(d.probs, vec![0.0, 1.0, 0.0]);
        assert_eq!(d.method, Method::Empirical);
        assert!(empirical_distribution(&BTreeMap::new(), &states).is_err());
    }

    #[test]
    fn bad_configs_rejected() {
        let t = ThresholdConfig::symmetric(2);
        let base = SimulationConfig::new(ChainKind::Assortative, 0.5, t, 100, 1);
        assert!(simulate(&SimulationConfig { p: 1.0, ..base.clone() }).is_err());
        assert!(simulate(&base.clone().with_burn_in(100)).is_err());
        let zero = SimulationConfig::new(ChainKind::Assortative, 0.5, ThresholdConfig::symmetric(0), 100, 1);
        assert!(simulate(&zero).is_err());
    }
}

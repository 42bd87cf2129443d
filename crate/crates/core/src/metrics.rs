//! Long-run performance of a policy under its stationary law.

use std::collections::BTreeMap;

use crate::chain::build_matrix;
use crate::domain::{
    arrival_probability, enumerate_arrival_pairs, enumerate_arrival_triplets, pair_probability,
    ChainKind, Composition, Label, Probability, State, ThresholdConfig, WelfareParams,
};
use crate::error::{Error, Result};
use crate::policy::{self, TeamReport};
use crate::scalar::Scalar;
use crate::solve::{stationary_direct, StationaryDistribution};

#[derive(Debug, Clone, PartialEq)]
pub struct QueueStats<T> {
    /// Expected waiting Highs per population.
    pub mean_high: Vec<T>,
    /// Expected number of waiting agents of any type, all populations.
    pub mean_total_waiting: T,
}

/// Queue expectations under `dist`, which must be over full (unlumped)
/// states of `kind`.
///
/// Assortative: Lows waiting follow `low_i = max(a) − a_i`, so the total is
/// `3·E[max(a)]`. Dis-assortative: `|k|` whole triplets wait, `3·E|k|`.
/// Two-way: `|k|` pairs wait, `2·E|k|`.
pub fn expected_queue_stats<T: Scalar>(
    dist: &StationaryDistribution<T>,
    kind: ChainKind,
) -> Result<QueueStats<T>> {
    if dist.states.len() != dist.probs.len() {
        return Err(Error::Misaligned {
            expected: dist.states.len(),
            got: dist.probs.len(),
        });
    }
    let arity = kind.arity();
    let mut mean_high = vec![T::zero(); arity];
    let mut occupied = T::zero();
    for (s, pi) in dist.states.iter().zip(&dist.probs) {
        let (highs, units): (Vec<i64>, i64) = match (kind, s) {
            (ChainKind::Assortative, State::Assortative(a)) => {
                (a.0.iter().map(|&x| x as i64).collect(), a.longest_queue() as i64)
            }
            (ChainKind::Disassortative, State::Signed(k)) => (vec![k.0.max(0); 3], k.0.abs()),
            (ChainKind::TwoWay, State::Signed(k)) => (vec![k.0.max(0), (-k.0).max(0)], k.0.abs()),
            _ => {
                return Err(Error::InvalidState(format!(
                    "state {s} does not belong to a {kind} chain"
                )))
            }
        };
        for (m, h) in mean_high.iter_mut().zip(highs) {
            *m = m.clone() + pi.clone() * T::from_int(h);
        }
        occupied = occupied + pi.clone() * T::from_int(units);
    }
    Ok(QueueStats {
        mean_high,
        mean_total_waiting: occupied * T::from_int(arity as i64),
    })
}

/// All-Low teams a period forms under greedy Low matching, given the
/// assortative reduced step `before -> after` and the teams it reported.
///
/// Every population holds `max(a)` agents after matching, so the Low
/// teams are whatever brings the post-arrival total down to `max(after)`.
pub fn implied_low_teams(before_max: u32, after_max: u32, report: &TeamReport) -> u32 {
    before_max + 1 - report.teams.len() as u32 - after_max
}

/// Expected teams of each composition per period: `Σ_s π(s) Σ_t P(t)·n(s, t)`.
/// For the assortative model all-Low teams follow the greedy convention of
/// the simulator.
pub fn analytic_team_rates<T: Scalar>(
    dist: &StationaryDistribution<T>,
    kind: ChainKind,
    p: &Probability<T>,
    thresholds: ThresholdConfig,
) -> Result<BTreeMap<Composition, T>> {
    thresholds.validate(kind)?;
    let mut rates: BTreeMap<Composition, T> = Composition::all(kind.arity())
        .into_iter()
        .map(|c| (c, T::zero()))
        .collect();
    let add = |rates: &mut BTreeMap<Composition, T>, c: Composition, w: T| {
        let slot = rates.get_mut(&c).expect("every composition present");
        *slot = slot.clone() + w;
    };
    for (s, pi) in dist.states.iter().zip(&dist.probs) {
        if pi.is_zero() {
            continue;
        }
        match (kind, s) {
            (ChainKind::Assortative, State::Assortative(a)) => {
                for t in enumerate_arrival_triplets() {
                    let w = pi.clone() * arrival_probability(&t, p);
                    let (next, report) = policy::assortative_step(*a, t, thresholds.k_bar)?;
                    for team in &report.teams {
                        add(&mut rates, team.composition(), w.clone());
                    }
                    let lows = implied_low_teams(a.longest_queue(), next.longest_queue(), &report);
                    add(
                        &mut rates,
                        Composition(vec![Label::Low; 3]),
                        w * T::from_int(lows as i64),
                    );
                }
            }
            (ChainKind::Disassortative, State::Signed(k)) => {
                for t in enumerate_arrival_triplets() {
                    let w = pi.clone() * arrival_probability(&t, p);
                    let (_, report) =
                        policy::disassortative_transition(*k, t, thresholds.k_high, thresholds.k_low)?;
                    for team in &report.teams {
                        add(&mut rates, team.composition(), w.clone());
                    }
                }
            }
            (ChainKind::TwoWay, State::Signed(k)) => {
                for pr in enumerate_arrival_pairs() {
                    let w = pi.clone() * pair_probability(&pr, p);
                    let (_, report) = policy::twoway_transition(*k, pr, thresholds.k_bar)?;
                    for team in &report.teams {
                        add(&mut rates, team.composition(), w.clone());
                    }
                }
            }
            _ => {
                return Err(Error::InvalidState(format!(
                    "state {s} does not belong to a {kind} chain"
                )))
            }
        }
    }
    Ok(rates)
}

/// Long-run welfare per period: `Σ rate·U − c·E[total waiting]`.
pub fn welfare_rate<T: Scalar>(
    dist: &StationaryDistribution<T>,
    kind: ChainKind,
    w: &WelfareParams<T>,
    team_rates: &BTreeMap<Composition, T>,
) -> Result<T> {
    let stats = expected_queue_stats(dist, kind)?;
    let mut surplus = T::zero();
    for (c, rate) in team_rates {
        if rate.is_zero() {
            continue;
        }
        let u = w
            .utility(c)
            .ok_or_else(|| Error::MissingUtility(c.to_string()))?;
        surplus = surplus + rate.clone() * u.clone();
    }
    Ok(surplus - w.waiting_cost.clone() * stats.mean_total_waiting)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub thresholds: ThresholdConfig,
    pub welfare: T,
    pub mean_total_waiting: T,
    pub best: bool,
}

/// Orders thresholds by total size, then `(k_high, k_low)`; the smallest
/// wins welfare ties.
fn threshold_size(kind: ChainKind, t: &ThresholdConfig) -> (u32, u32, u32) {
    match kind {
        ChainKind::Disassortative => (t.k_high + t.k_low, t.k_high, t.k_low),
        _ => (t.k_bar, 0, 0),
    }
}

/// Exact welfare for each threshold setting; flags the best row.
pub fn threshold_sweep<T: Scalar>(
    kind: ChainKind,
    p: &Probability<T>,
    thresholds: &[ThresholdConfig],
    w: &WelfareParams<T>,
) -> Result<Vec<SweepRow<T>>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParams("empty threshold range".into()));
    }
    let mut rows = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        let dist = stationary_direct(&build_matrix(kind, p, *t)?)?;
        let rates = analytic_team_rates(&dist, kind, p, *t)?;
        let welfare = welfare_rate(&dist, kind, w, &rates)?;
        let stats = expected_queue_stats(&dist, kind)?;
        rows.push(SweepRow {
            thresholds: *t,
            welfare,
            mean_total_waiting: stats.mean_total_waiting,
            best: false,
        });
    }
    let top = rows
        .iter()
        .map(|r| r.welfare.clone())
        .fold(None, |acc: Option<T>, x| match acc {
            Some(a) if a >= x => Some(a),
            _ => Some(x),
        })
        .unwrap();
    let slack = T::solver_tolerance() * top.to_f64_lossy().abs().max(1.0);
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| (top.clone() - r.welfare.clone()).to_f64_lossy() <= slack)
        .min_by_key(|(_, r)| threshold_size(kind, &r.thresholds))
        .map(|(i, _)| i)
        .unwrap();
    rows[best].best = true;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_assortative_matrix, build_disassortative_matrix};
    use crate::domain::{AssortativeState, SignedQueueState};
    use crate::scalar::ratio;
    use crate::solve::{closed_form_disassortative, closed_form_twoway, Method};
    use crate::Exact;

    fn point_mass(s: State) -> StationaryDistribution<f64> {
        StationaryDistribution {
            states: vec![s],
            probs: vec![1.0],
            residual: None,
            method: Method::ClosedForm,
            iterations: None,
        }
    }

    #[test]
    fn empty_market_has_no_queues() {
        let d = point_mass(State::Assortative(AssortativeState([0, 0, 0])));
        let s = expected_queue_stats(&d, ChainKind::Assortative).unwrap();
        assert_eq!(s.mean_high, vec![0.0; 3]);
        assert_eq!(s.mean_total_waiting, 0.0);
    }

    #[test]
    fn twoway_uniform_mean_abs_k() {
        let d: StationaryDistribution<Exact> = closed_form_twoway(1);
        let s = expected_queue_stats(&d, ChainKind::TwoWay).unwrap();
        // E|k| = 2/3 over uniform {-1, 0, 1}; two agents wait per unit.
        assert_eq!(s.mean_total_waiting, ratio(4, 3));
        assert_eq!(s.mean_high, vec![ratio(1, 3), ratio(1, 3)]);
    }

    #[test]
    fn disassortative_half_one_one_waiting() {
        let p = Probability::new(ratio(1, 2)).unwrap();
        let d = closed_form_disassortative(&p, 1, 1);
        let s = expected_queue_stats(&d, ChainKind::Disassortative).unwrap();
        assert_eq!(s.mean_total_waiting, ratio(1, 1));
    }

    #[test]
    fn welfare_single_term_and_empty_market() {
        let w = WelfareParams::by_high_count(3, &[1.0, 2.0, 3.0, 5.0], 0.5).unwrap();
        let d = point_mass(State::Assortative(AssortativeState([0, 0, 0])));
        let rates = BTreeMap::from([(Composition(vec![Label::High; 3]), 0.25)]);
        let free = w.with_waiting_cost(0.0);
        assert_eq!(welfare_rate(&d, ChainKind::Assortative, &free, &rates).unwrap(), 0.25 * 5.0);
        assert_eq!(
            welfare_rate(&d, ChainKind::Assortative, &w, &BTreeMap::new()).unwrap(),
            0.0
        );
    }

    #[test]
    fn missing_utility_is_an_error() {
        let w = WelfareParams::new(BTreeMap::new(), 0.1).unwrap();
        let d = point_mass(State::Signed(SignedQueueState(0)));
        let rates = BTreeMap::from([(Composition(vec![Label::High, Label::High]), 1.0)]);
        assert!(matches!(
            welfare_rate(&d, ChainKind::TwoWay, &w, &rates),
            Err(Error::MissingUtility(_))
        ));
    }

    #[test]
    fn throughput_is_one_team_per_period() {
        for kind in [ChainKind::TwoWay, ChainKind::Assortative, ChainKind::Disassortative] {
            for k in 1..4 {
                let p = Probability::new(ratio(2, 5)).unwrap();
                let t = ThresholdConfig::symmetric(k);
                let d = stationary_direct(&build_matrix(kind, &p, t).unwrap()).unwrap();
                let rates = analytic_team_rates(&d, kind, &p, t).unwrap();
                let total = rates.values().fold(ratio(0, 1), |a, b| a + b.clone());
                assert_eq!(total, ratio(1, 1), "{kind} k={k}");
            }
        }
    }

    #[test]
    fn implied_low_teams_cases() {
        let s = AssortativeState([0, 0, 0]);
        let (next, r) = policy::assortative_step(s, crate::ArrivalTriplet([Label::Low; 3]), 2).unwrap();
        assert_eq!(implied_low_teams(s.longest_queue(), next.longest_queue(), &r), 1);
        let (next, r) = policy::assortative_step(
            s,
            crate::ArrivalTriplet([Label::High, Label::Low, Label::Low]),
            2,
        )
        .unwrap();
        assert_eq!(implied_low_teams(s.longest_queue(), next.longest_queue(), &r), 0);
    }

    #[test]
    fn sweep_flags_ties_to_smallest() {
        let p = Probability::new(0.5f64).unwrap();
        let flat = WelfareParams::by_high_count(3, &[2.0; 4], 1.0).unwrap().with_waiting_cost(0.0);
        let ts: Vec<_> = (1..=4).map(ThresholdConfig::symmetric).collect();
        let rows = threshold_sweep(ChainKind::Assortative, &p, &ts, &flat).unwrap();
        assert!(rows.iter().all(|r| (r.welfare - 2.0).abs() < 1e-12));
        assert!(rows[0].best && rows.iter().filter(|r| r.best).count() == 1);

        let single = threshold_sweep(ChainKind::Assortative, &p, &ts[2..3], &flat).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].best);
        assert!(threshold_sweep(ChainKind::Assortative, &p, &[], &flat).is_err());
    }

    #[test]
    fn sweep_rows_match_individual_calls() {
        let p = Probability::new(0.3).unwrap();
        let w = WelfareParams::example(ChainKind::Disassortative);
        let ts = [ThresholdConfig::disassortative(1, 2), ThresholdConfig::disassortative(3, 1)];
        let rows = threshold_sweep(ChainKind::Disassortative, &p, &ts, &w).unwrap();
        for (row, t) in rows.iter().zip(ts) {
            let d = stationary_direct(&build_disassortative_matrix(&p, t.k_high, t.k_low).unwrap()).unwrap();
            let rates = analytic_team_rates(&d, ChainKind::Disassortative, &p, t).unwrap();
            assert_eq!(row.welfare, welfare_rate(&d, ChainKind::Disassortative, &w, &rates).unwrap());
        }
    }

    #[test]
    fn queue_means_are_permutation_invariant() {
        let p = Probability::new(ratio(1, 3)).unwrap();
        let d = stationary_direct(&build_assortative_matrix(&p, 3).unwrap()).unwrap();
        let s = expected_queue_stats(&d, ChainKind::Assortative).unwrap();
        assert!(s.mean_high.iter().all(|m| *m == s.mean_high[0]));
    }
}

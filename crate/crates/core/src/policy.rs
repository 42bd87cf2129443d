//! One-period matching steps.
//!
//! Each function maps `(reduced state, arrival) -> next reduced state` and
//! reports the teams formed. Transition matrices are generated from these
//! functions, never written down by hand.

use crate::domain::{
    ArrivalPair, ArrivalTriplet, AssortativeState, Composition, Label, SignedQueueState,
};
use crate::error::Result;

/// Where a team member came from. Queues are served FIFO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Queue,
    Arrival,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Member {
    pub label: Label,
    /// `None` when the reduced state cannot tell (Low members of the
    /// assortative chain, whose queues it does not track).
    pub origin: Option<Origin>,
}

impl Member {
    fn queued(label: Label) -> Self {
        Self {
            label,
            origin: Some(Origin::Queue),
        }
    }

    fn arrived(label: Label) -> Self {
        Self {
            label,
            origin: Some(Origin::Arrival),
        }
    }
}

/// One team, one member per population in population order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    pub members: Vec<Member>,
    /// Formed only because a threshold would otherwise be exceeded.
    pub forced: bool,
}

impl Team {
    pub fn composition(&self) -> Composition {
        Composition(self.members.iter().map(|m| m.label).collect())
    }
}

/// Teams formed in one period.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TeamReport {
    pub teams: Vec<Team>,
}

impl TeamReport {
    pub fn forced_count(&self) -> usize {
        self.teams.iter().filter(|t| t.forced).count()
    }
}

/// Three-way assortative step under threshold `k_bar`.
///
/// 1. Arriving Highs join their population's queue.
/// 2. `min(a)` all-High teams are formed.
/// 3. If some queue exceeds `k_bar`, one forced team is formed: every
///    population with a waiting High contributes it, the others a Low.
pub fn assortative_step(
    s: AssortativeState,
    t: ArrivalTriplet,
    k_bar: u32,
) -> Result<(AssortativeState, TeamReport)> {
    crate::domain::ThresholdConfig::symmetric(k_bar).validate(crate::ChainKind::Assortative)?;
    s.validate(k_bar)?;

    let queued_before = s.0;
    let mut taken = [0u32; 3];
    let mut take_high = |i: usize| {
        let origin = if taken[i] < queued_before[i] {
            Origin::Queue
        } else {
            Origin::Arrival
        };
        taken[i] += 1;
        Member {
            label: Label::High,
            origin: Some(origin),
        }
    };

    let mut a = s.0;
    for (ai, label) in a.iter_mut().zip(t.0) {
        if label.is_high() {
            *ai += 1;
        }
    }

    let mut report = TeamReport::default();
    let m = *a.iter().min().unwrap();
    for ai in a.iter_mut() {
        *ai -= m;
    }
    for _ in 0..m {
        let members = (0..3).map(&mut take_high).collect();
        report.teams.push(Team {
            members,
            forced: false,
        });
    }

    if a.iter().any(|&x| x > k_bar) {
        let members = (0..3)
            .map(|i| {
                if a[i] > 0 {
                    a[i] -= 1;
                    take_high(i)
                } else {
                    Member {
                        label: Label::Low,
                        origin: None,
                    }
                }
            })
            .collect();
        report.teams.push(Team {
            members,
            forced: true,
        });
    }

    Ok((AssortativeState(a), report))
}

/// Dis-assortative step on the signed triplet queue `k` (High triplets
/// minus Low triplets), thresholds `k_high` and `k_low`.
pub fn disassortative_step(
    k: SignedQueueState,
    t: ArrivalTriplet,
    k_high: u32,
    k_low: u32,
) -> Result<SignedQueueState> {
    disassortative_transition(k, t, k_high, k_low).map(|(next, _)| next)
}

/// [`disassortative_step`] together with the teams it forms.
///
/// Mixed teams are formed whenever possible. When the arrival carries at
/// least two members of the type opposite to the waiting stock, one
/// waiting triplet is consumed into two mixed teams: the first takes the
/// arrival at the lowest such position and queued members elsewhere, the
/// second takes everything left.
pub fn disassortative_transition(
    k: SignedQueueState,
    t: ArrivalTriplet,
    k_high: u32,
    k_low: u32,
) -> Result<(SignedQueueState, TeamReport)> {
    let k = SignedQueueState::new(k.0, k_high, k_low)?.0;
    let mut report = TeamReport::default();
    let n = t.high_count();

    // Waiting stock type, if any.
    let queue = match k.signum() {
        1 => Some(Label::High),
        -1 => Some(Label::Low),
        _ => None,
    };

    let next = match queue {
        Some(q) => {
            let opposite: Vec<usize> = (0..3).filter(|&i| t.0[i] != q).collect();
            match opposite.len() {
                0 => {
                    // Homogeneous arrival of the queued type.
                    let limit = if q.is_high() { k_high } else { k_low } as i64;
                    if k.abs() == limit {
                        report.teams.push(Team {
                            members: vec![Member::queued(q); 3],
                            forced: true,
                        });
                        k
                    } else {
                        k + k.signum()
                    }
                }
                1 => {
                    report.teams.push(Team {
                        members: t.0.iter().map(|&l| Member::arrived(l)).collect(),
                        forced: false,
                    });
                    k
                }
                _ => {
                    let first = opposite[0];
                    let team1 = (0..3)
                        .map(|i| {
                            if i == first {
                                Member::arrived(t.0[i])
                            } else {
                                Member::queued(q)
                            }
                        })
                        .collect();
                    let team2 = (0..3)
                        .map(|i| {
                            if i == first {
                                Member::queued(q)
                            } else {
                                Member::arrived(t.0[i])
                            }
                        })
                        .collect();
                    report.teams.push(Team {
                        members: team1,
                        forced: false,
                    });
                    report.teams.push(Team {
                        members: team2,
                        forced: false,
                    });
                    k - k.signum()
                }
            }
        }
        None => match n {
            1 | 2 => {
                report.teams.push(Team {
                    members: t.0.iter().map(|&l| Member::arrived(l)).collect(),
                    forced: false,
                });
                0
            }
            3 if k_high == 0 => {
                report.teams.push(Team {
                    members: vec![Member::arrived(Label::High); 3],
                    forced: true,
                });
                0
            }
            0 if k_low == 0 => {
                report.teams.push(Team {
                    members: vec![Member::arrived(Label::Low); 3],
                    forced: true,
                });
                0
            }
            3 => 1,
            _ => -1,
        },
    };
    Ok((SignedQueueState(next), report))
}

/// Two-way step on the signed `H - h` queue with symmetric threshold `k_bar`.
pub fn twoway_step(k: SignedQueueState, pair: ArrivalPair, k_bar: u32) -> Result<SignedQueueState> {
    twoway_transition(k, pair, k_bar).map(|(next, _)| next)
}

/// [`twoway_step`] together with the pairs it forms.
///
/// A positive `k` means `k` unmatched `H` and `k` unmatched `l` are waiting;
/// a negative `k` means `|k|` unmatched `h` and `L`.
pub fn twoway_transition(
    k: SignedQueueState,
    pair: ArrivalPair,
    k_bar: u32,
) -> Result<(SignedQueueState, TeamReport)> {
    let k = SignedQueueState::new(k.0, k_bar, k_bar)?.0;
    let limit = k_bar as i64;
    let mut report = TeamReport::default();
    let mut push = |a: Member, b: Member, forced: bool| {
        report.teams.push(Team {
            members: vec![a, b],
            forced,
        })
    };
    use Label::{High, Low};
    let next = match pair.0 {
        [x, y] if x == y => {
            push(Member::arrived(x), Member::arrived(y), false);
            k
        }
        [High, _] => {
            // (H, l)
            if k < 0 {
                push(Member::arrived(High), Member::queued(High), false);
                push(Member::queued(Low), Member::arrived(Low), false);
                k + 1
            } else if k == limit {
                let origin = |waiting: bool| if waiting { Member::queued } else { Member::arrived };
                push(origin(k > 0)(High), origin(k > 0)(Low), true);
                k
            } else {
                k + 1
            }
        }
        [Low, _] => {
            // (L, h)
            if k > 0 {
                push(Member::queued(High), Member::arrived(High), false);
                push(Member::arrived(Low), Member::queued(Low), false);
                k - 1
            } else if k == -limit {
                let origin = |waiting: bool| if waiting { Member::queued } else { Member::arrived };
                push(origin(k < 0)(Low), origin(k < 0)(High), true);
                k
            } else {
                k - 1
            }
        }
    };
    Ok((SignedQueueState(next), report))
}

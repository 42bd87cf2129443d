//! Domain types: agent labels, arrival events, thresholds, reduced states and
//! welfare parameters.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Proportion of High types, shared by every population. `q = 1 - p` is
/// always derived.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct Probability<T> {
    p: T,
}

impl<T: Scalar> Probability<T> {
    pub fn new(p: T) -> Result<Self> {
        if p > T::zero() && p < T::one() {
            Ok(Self { p })
        } else {
            Err(Error::InvalidProbability(p.to_string()))
        }
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn q(&self) -> T {
        T::one() - self.p.clone()
    }

    /// The High/Low mirror image, `p ↦ 1 - p`.
    pub fn complement(&self) -> Self {
        Self { p: self.q() }
    }
}

/// Agent type. `High < Low` in the enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    High,
    Low,
}

impl Label {
    pub fn is_high(self) -> bool {
        self == Label::High
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::High => Label::Low,
            Label::Low => Label::High,
        }
    }
}

/// One arrival per population in a three-way market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrivalTriplet(pub [Label; 3]);

impl ArrivalTriplet {
    pub fn high_count(&self) -> u32 {
        self.0.iter().filter(|l| l.is_high()).count() as u32
    }

    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self([self.0[perm[0]], self.0[perm[1]], self.0[perm[2]]])
    }
}

impl fmt::Display for ArrivalTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.0 {
            write!(f, "{}", if l.is_high() { 'H' } else { 'L' })?;
        }
        Ok(())
    }
}

/// One arrival from each side of a two-way market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrivalPair(pub [Label; 2]);

/// All 8 arrival triplets, lexicographic with `High < Low`:
/// `HHH, HHL, HLH, HLL, LHH, LHL, LLH, LLL`.
pub fn enumerate_arrival_triplets() -> [ArrivalTriplet; 8] {
    let both = [Label::High, Label::Low];
    let mut out = [ArrivalTriplet([Label::High; 3]); 8];
    let mut i = 0;
    for a in both {
        for b in both {
            for c in both {
                out[i] = ArrivalTriplet([a, b, c]);
                i += 1;
            }
        }
    }
    out
}

/// All 4 arrival pairs in the order `Hh, Hl, Lh, Ll`.
pub fn enumerate_arrival_pairs() -> [ArrivalPair; 4] {
    use Label::*;
    [
        ArrivalPair([High, High]),
        ArrivalPair([High, Low]),
        ArrivalPair([Low, High]),
        ArrivalPair([Low, Low]),
    ]
}

fn label_probability<T: Scalar>(labels: &[Label], p: &Probability<T>) -> T {
    let highs = labels.iter().filter(|l| l.is_high()).count() as u32;
    let lows = labels.len() as u32 - highs;
    p.p().powu(highs) * p.q().powu(lows)
}

/// `p^(#High) · q^(#Low)`.
pub fn arrival_probability<T: Scalar>(t: &ArrivalTriplet, p: &Probability<T>) -> T {
    label_probability(&t.0, p)
}

pub fn pair_probability<T: Scalar>(pair: &ArrivalPair, p: &Probability<T>) -> T {
    label_probability(&pair.0, p)
}

/// Which of the three market models a chain describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChainKind {
    TwoWay,
    Assortative,
    Disassortative,
}

impl ChainKind {
    pub fn name(self) -> &'static str {
        match self {
            ChainKind::TwoWay => "twoway",
            ChainKind::Assortative => "assortative",
            ChainKind::Disassortative => "disassortative",
        }
    }

    /// Agents per team.
    pub fn arity(self) -> usize {
        match self {
            ChainKind::TwoWay => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Queue thresholds. `k_bar` drives the two-way and assortative models,
/// `k_high`/`k_low` the dis-assortative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ThresholdConfig {
    pub k_bar: u32,
    pub k_high: u32,
    pub k_low: u32,
}

impl ThresholdConfig {
    /// Single threshold for the two-way and assortative models.
    pub fn symmetric(k_bar: u32) -> Self {
        Self {
            k_bar,
            k_high: k_bar,
            k_low: k_bar,
        }
    }

    pub fn disassortative(k_high: u32, k_low: u32) -> Self {
        Self {
            k_bar: k_high.max(k_low),
            k_high,
            k_low,
        }
    }

    pub fn validate(&self, kind: ChainKind) -> Result<()> {
        if kind == ChainKind::Assortative && self.k_bar == 0 {
            return Err(Error::InvalidThreshold(
                "the assortative chain needs k_bar >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Waiting High counts `(a1, a2, a3)`; at least one coordinate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AssortativeState(pub [u32; 3]);

impl AssortativeState {
    pub fn new(a: [u32; 3], k_bar: u32) -> Result<Self> {
        let s = Self(a);
        s.validate(k_bar)?;
        Ok(s)
    }

    pub fn validate(&self, k_bar: u32) -> Result<()> {
        let a = self.0;
        if a.iter().min() != Some(&0) {
            return Err(Error::InvalidState(format!("{self} has no zero coordinate")));
        }
        if a.iter().any(|&x| x > k_bar) {
            return Err(Error::InvalidState(format!("{self} exceeds k_bar = {k_bar}")));
        }
        Ok(())
    }

    pub fn longest_queue(&self) -> u32 {
        *self.0.iter().max().unwrap()
    }

    /// Coordinate permutation: output `i` takes input coordinate `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self([self.0[perm[0]], self.0[perm[1]], self.0[perm[2]]])
    }

    /// Orbit representative: coordinates sorted in descending order.
    pub fn canonical(&self) -> Self {
        let mut a = self.0;
        a.sort_unstable_by(|x, y| y.cmp(x));
        Self(a)
    }
}

impl fmt::Display for AssortativeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// The six permutations of three populations, identity first.
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Signed queue length: waiting High units minus waiting Low units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SignedQueueState(pub i64);

impl SignedQueueState {
    /// Checks `-lower <= k <= upper`.
    pub fn new(k: i64, upper: u32, lower: u32) -> Result<Self> {
        if k > upper as i64 || k < -(lower as i64) {
            return Err(Error::InvalidState(format!(
                "k = {k} outside [-{lower}, {upper}]"
            )));
        }
        Ok(Self(k))
    }
}

impl fmt::Display for SignedQueueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A reduced chain state of either shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Assortative(AssortativeState),
    Signed(SignedQueueState),
}

impl State {
    pub fn as_assortative(&self) -> Option<AssortativeState> {
        match self {
            State::Assortative(s) => Some(*s),
            State::Signed(_) => None,
        }
    }

    pub fn as_signed(&self) -> Option<SignedQueueState> {
        match self {
            State::Signed(s) => Some(*s),
            State::Assortative(_) => None,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Assortative(s) => s.fmt(f),
            State::Signed(s) => s.fmt(f),
        }
    }
}

/// Ordered type profile of a team, one label per population.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition(pub Vec<Label>);

impl Composition {
    pub fn high_count(&self) -> usize {
        self.0.iter().filter(|l| l.is_high()).count()
    }

    /// Every composition of the given arity, lexicographic with `High < Low`.
    pub fn all(arity: usize) -> Vec<Composition> {
        (0..1usize << arity)
            .map(|bits| {
                Composition(
                    (0..arity)
                        .map(|i| {
                            if bits >> (arity - 1 - i) & 1 == 0 {
                                Label::High
                            } else {
                                Label::Low
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for Composition {
    /// Three-way: `HHL`. Two-way: second population in lower case, `Hl`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            let c = match (l, self.0.len() == 2 && i == 1) {
                (Label::High, false) => 'H',
                (Label::Low, false) => 'L',
                (Label::High, true) => 'h',
                (Label::Low, true) => 'l',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Team utilities and the per-agent, per-period waiting cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareParams<T> {
    pub match_utilities: BTreeMap<Composition, T>,
    pub waiting_cost: T,
}

impl<T: Scalar> WelfareParams<T> {
    pub fn new(match_utilities: BTreeMap<Composition, T>, waiting_cost: T) -> Result<Self> {
        if waiting_cost <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "waiting cost must be positive, got {waiting_cost}"
            )));
        }
        if let Some((c, u)) = match_utilities.iter().find(|(_, u)| **u < T::zero()) {
            return Err(Error::InvalidParams(format!("negative utility {u} for {c}")));
        }
        Ok(Self {
            match_utilities,
            waiting_cost,
        })
    }

    /// Utilities that depend only on how many High members a team has;
    /// `by_high[n]` is the utility of a team with `n` Highs.
    pub fn by_high_count(arity: usize, by_high: &[T], waiting_cost: T) -> Result<Self> {
        if by_high.len() != arity + 1 {
            return Err(Error::Misaligned {
                expected: arity + 1,
                got: by_high.len(),
            });
        }
        let utilities = Composition::all(arity)
            .into_iter()
            .map(|c| {
                let u = by_high[c.high_count()].clone();
                (c, u)
            })
            .collect();
        Self::new(utilities, waiting_cost)
    }

    /// Two-way utilities `U_Hh, U_Hl, U_Lh, U_Ll` (sums over both partners).
    pub fn two_way(u_hh: T, u_hl: T, u_lh: T, u_ll: T, waiting_cost: T) -> Result<Self> {
        use Label::*;
        let utilities = [
            (Composition(vec![High, High]), u_hh),
            (Composition(vec![High, Low]), u_hl),
            (Composition(vec![Low, High]), u_lh),
            (Composition(vec![Low, Low]), u_ll),
        ]
        .into_iter()
        .collect();
        Self::new(utilities, waiting_cost)
    }

    /// Same utilities with a different waiting cost; the cost is not
    /// re-validated so that `c = 0` can be probed.
    pub fn with_waiting_cost(&self, waiting_cost: T) -> Self {
        Self {
            match_utilities: self.match_utilities.clone(),
            waiting_cost,
        }
    }

    pub fn utility(&self, c: &Composition) -> Option<&T> {
        self.match_utilities.get(c)
    }

    /// Checks the preference ordering the given market model assumes.
    pub fn validate_for(&self, kind: ChainKind) -> Result<()> {
        let get = |c: &Composition| {
            self.utility(c)
                .cloned()
                .ok_or_else(|| Error::MissingUtility(c.to_string()))
        };
        let all = Composition::all(kind.arity());
        match kind {
            ChainKind::Assortative => {
                for a in &all {
                    for b in &all {
                        if a.high_count() > b.high_count() && get(a)? <= get(b)? {
                            return Err(Error::InvalidParams(format!(
                                "assortative utilities must increase with High members: U({a}) <= U({b})"
                            )));
                        }
                    }
                }
            }
            ChainKind::Disassortative => {
                let mixed: Vec<T> = all
                    .iter()
                    .filter(|c| (1..=2).contains(&c.high_count()))
                    .map(get)
                    .collect::<Result<_>>()?;
                if mixed.iter().any(|u| *u != mixed[0]) {
                    return Err(Error::InvalidParams(
                        "dis-assortative utilities must be equal across mixed teams".into(),
                    ));
                }
                for c in all.iter().filter(|c| c.high_count() % 3 == 0) {
                    if get(c)? >= mixed[0] {
                        return Err(Error::InvalidParams(format!(
                            "dis-assortative utilities must rank mixed teams above {c}"
                        )));
                    }
                }
            }
            ChainKind::TwoWay => {
                let [hh, hl, lh, ll] = [&all[0], &all[1], &all[2], &all[3]].map(get);
                let surplus = hh? + ll? - hl? - lh?;
                if surplus <= T::zero() {
                    return Err(Error::InvalidParams(format!(
                        "two-way utilities need U_Hh + U_Ll - U_Hl - U_Lh > 0, got {surplus}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ordinal-respecting example utilities; not calibrated to anything.
    pub fn example(kind: ChainKind) -> Self {
        let t = |x: i64| T::from_int(x);
        let cost = T::one() / T::from_int(10);
        match kind {
            ChainKind::Assortative => {
                Self::by_high_count(3, &[t(1), t(2), t(3), t(4)], cost).unwrap()
            }
            ChainKind::Disassortative => {
                Self::by_high_count(3, &[t(1), t(3), t(3), t(1)], cost).unwrap()
            }
            ChainKind::TwoWay => Self::two_way(t(4), t(2), t(2), t(1), cost).unwrap(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn eight_triplets_in_documented_order() {
        let all = enumerate_arrival_triplets();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], ArrivalTriplet([Label::High; 3]));
        assert_eq!(all[7], ArrivalTriplet([Label::Low; 3]));
        let mut sorted = all.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all.to_vec());
        let names: Vec<String> = all.iter().map(|t| t.to_string()).collect();
        assert_eq!(names, ["HHH", "HHL", "HLH", "HLL", "LHH", "LHL", "LLH", "LLL"]);
    }

    #[test]
    fn arrival_probability_at_half() {
        let p = Probability::new(0.5).unwrap();
        let all = enumerate_arrival_triplets();
        assert_eq!(arrival_probability(&all[0], &p), 0.125);
        assert_eq!(arrival_probability(&all[3], &p), 0.125);
    }

    #[test]
    fn arrival_probabilities_sum_to_one_exactly() {
        for (n, d) in [(1, 10), (1, 3), (7, 9)] {
            let p = Probability::new(ratio(n, d)).unwrap();
            let total = enumerate_arrival_triplets()
                .iter()
                .fold(ratio(0, 1), |acc, t| acc + arrival_probability(t, &p));
            assert_eq!(total, ratio(1, 1));
        }
    }

    #[test]
    fn probability_rejects_boundaries() {
        assert!(Probability::new(0.0).is_err());
        assert!(Probability::new(1.0).is_err());
        assert!(Probability::new(-0.2).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert_eq!(Probability::new(0.25).unwrap().q(), 0.75);
    }

    #[test]
    fn assortative_state_invariants() {
        assert!(AssortativeState::new([2, 1, 0], 2).is_ok());
        assert!(AssortativeState::new([1, 1, 1], 2).is_err());
        assert!(AssortativeState::new([3, 0, 0], 2).is_err());
        assert_eq!(AssortativeState([0, 2, 1]).canonical(), AssortativeState([2, 1, 0]));
    }

    #[test]
    fn signed_state_bounds() {
        assert!(SignedQueueState::new(-2, 1, 2).is_ok());
        assert!(SignedQueueState::new(2, 1, 2).is_err());
        assert!(SignedQueueState::new(-3, 1, 2).is_err());
    }

    #[test]
    fn assortative_k_bar_zero_rejected() {
        assert!(ThresholdConfig::symmetric(0)
            .validate(ChainKind::Assortative)
            .is_err());
        assert!(ThresholdConfig::symmetric(0).validate(ChainKind::TwoWay).is_ok());
    }

    #[test]
    fn composition_display() {
        use Label::*;
        assert_eq!(Composition(vec![High, Low]).to_string(), "Hl");
        assert_eq!(Composition(vec![High, High, Low]).to_string(), "HHL");
        assert_eq!(Composition::all(3).len(), 8);
        assert_eq!(Composition::all(2)[1], Composition(vec![High, Low]));
    }

    #[test]
    fn example_utilities_respect_orderings() {
        for kind in [ChainKind::TwoWay, ChainKind::Assortative, ChainKind::Disassortative] {
            WelfareParams::<f64>::example(kind).validate_for(kind).unwrap();
        }
        let flat = WelfareParams::by_high_count(3, &[1.0, 1.0, 1.0, 1.0], 0.1).unwrap();
        assert!(flat.validate_for(ChainKind::Assortative).is_err());
        assert!(flat.validate_for(ChainKind::Disassortative).is_err());
        let bad = WelfareParams::two_way(1.0, 1.0, 1.0, 1.0, 0.1).unwrap();
        assert!(bad.validate_for(ChainKind::TwoWay).is_err());
        assert!(WelfareParams::by_high_count(3, &[1.0, 2.0, 3.0, 4.0], 0.0).is_err());
    }
}

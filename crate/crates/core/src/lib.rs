//! Markov-chain analysis of dynamic matching markets under threshold
//! policies.
//!
//! Three models are covered:
//!
//! * **two-way**: one agent from each of two populations arrives per
//!   period; the state is the signed `H − h` queue.
//! * **three-way assortative**: one agent from each of three populations
//!   arrives per period; teams prefer as many High members as possible and
//!   a High queue longer than `k_bar` forces a match. The state is the
//!   vector of waiting High counts.
//! * **three-way dis-assortative**: mixed teams are preferred; the state
//!   is the signed count of waiting all-High minus all-Low triplets, with
//!   thresholds `k_high` and `k_low`.
//!
//! Transition matrices are generated from the per-period policy steps in
//! [`policy`]. Stationary laws come from a pivoted direct solve, power
//! iteration, or the closed forms in [`solve`], and the full-queue
//! simulator in [`montecarlo`] validates them empirically.
//!
//! All numerics are generic over [`Scalar`]; use the aliases below for
//! `f64` work or [`Exact`] rationals when identities must hold exactly.
//!
//! ```
//! use matchmarket::{chain, solve, ChainKind, Probability64, ThresholdConfig};
//!
//! let p = Probability64::new(0.3).unwrap();
//! let m = chain::build_matrix(ChainKind::TwoWay, &p, ThresholdConfig::symmetric(2)).unwrap();
//! let pi = solve::stationary_direct(&m).unwrap();
//! assert!(pi.probs.iter().all(|x| (x - 0.2).abs() < 1e-12));
//! ```

pub mod chain;
pub mod domain;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod policy;
pub mod scalar;
pub mod solve;
pub mod table;

pub use chain::{
    build_matrix, check_ergodicity, lump_by_symmetry, ErgodicityReport, LumpedChain,
    TransitionMatrix,
};
pub use domain::{
    arrival_probability, enumerate_arrival_triplets, ArrivalPair, ArrivalTriplet,
    AssortativeState, ChainKind, Composition, Label, Probability, SignedQueueState, State,
    ThresholdConfig, WelfareParams,
};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use solve::{Method, StationaryDistribution};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Probability64 = Probability<f64>;
pub type ExactProbability = Probability<Exact>;
pub type Matrix64 = TransitionMatrix<f64>;
pub type ExactMatrix = TransitionMatrix<Exact>;
pub type Lumped64 = LumpedChain<f64>;
pub type Distribution64 = StationaryDistribution<f64>;
pub type ExactDistribution = StationaryDistribution<Exact>;
pub type Welfare64 = WelfareParams<f64>;

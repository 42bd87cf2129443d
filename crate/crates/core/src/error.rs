use thiserror::Error;

/// Errors raised by construction, solving and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    InvalidProbability(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("state violates its invariants: {0}")]
    InvalidState(String),

    #[error("operation needs an assortative chain")]
    NotAssortative,

    #[error(
        "strong lumpability violated in class {class}: rows differ by {discrepancy:e} \
         at representative {member}"
    )]
    NotLumpable {
        class: usize,
        member: usize,
        discrepancy: f64,
    },

    #[error("singular system at pivot column {column}; the chain is not ergodic")]
    Singular { column: usize },

    #[error("solution has a negative entry {value:e} at state {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    Misaligned { expected: usize, got: usize },

    #[error("no utility for team composition {0}")]
    MissingUtility(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("simulation invariant violated in period {period}: {detail}")]
    InvariantViolation { period: u64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

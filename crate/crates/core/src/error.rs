use thiserror::Error;

/// Errors produced by the construction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),
    #[error("invalid depth {0} (supported: 0..={max})", max = crate::index::MAX_DEPTH)]
    InvalidDepth(u32),
    #[error("index {index} out of range for depth {n}")]
    IndexOutOfRange { index: u64, n: u32 },
    #[error("integer overflow computing {0}")]
    Overflow(&'static str),
    #[error("operator order {order} is not available at depth {n}")]
    InvalidOrder { order: u32, n: u32 },
    #[error("exhaustive analysis limited to n <= {limit}, got {n}")]
    TooLarge { n: u32, limit: u32 },
    #[error("comparability search exceeded budget of {0} visited nodes")]
    SearchBudgetExceeded(usize),
    #[error("measured edge {lower} < {upper} contradicts existing relation {upper} <= {lower}")]
    Cycle { lower: u64, upper: u64 },
    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("quadrature did not converge at x = {x} (error estimate {estimate:e})")]
    Quadrature { x: f64, estimate: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("infeasible fast design: {frozen_slots} frozen slots < {pre_frozen} pre-frozen channels")]
    Infeasible { frozen_slots: usize, pre_frozen: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors raised by the analysis modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("probability must lie strictly inside (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("TOO_FEW_ROWS: need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("model dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("training set contains a single class")]
    SingleClass,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("ALL_MISSING: every feature of the row is missing")]
    AllMissing,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fusion weights must contain at least one positive value")]
    NoPositiveWeight,
}

pub type Result<T> = std::result::Result<T, Error>;

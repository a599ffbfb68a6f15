use thiserror::Error;

/// Errors surfaced by estimators, resampling schemes, and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sample too short: need at least {needed} rows, got {actual}")]
    SampleTooShort { needed: usize, actual: usize },

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite { what: String, row: usize, col: usize },

    #[error("degenerate bandwidth: conditioning data has zero spread")]
    DegenerateBandwidth,

    #[error("degenerate kernel neighborhood at observation {index}: leave-one-out weight sum is zero")]
    DegenerateNeighborhood { index: usize },

    #[error("invalid block length {len}: must satisfy 1 <= L <= {n}")]
    InvalidBlockLength { len: usize, n: usize },

    #[error("empty process values")]
    EmptyProcess,

    #[error("singular design matrix")]
    SingularDesign,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

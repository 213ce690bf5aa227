use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("read at position {pos} is out of bounds for tape of length {len}")]
    OutOfBounds { pos: u64, len: u64 },

    #[error("read-once tape: read at position {pos} but head is at {head}")]
    ReadOncePolicyViolation { pos: u64, head: u64 },

    #[error("workspace limit exceeded by `{label}`: {live} live bits > limit {limit}")]
    LimitExceeded { label: String, live: u64, limit: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed vertex pair or subset: {0}")]
    MalformedSubset(String),

    #[error("harvest ran out of qualifying vertices: needed {needed}, found {found}")]
    InsufficientHarvest { needed: u64, found: u64 },

    #[error("not enough random bits: need {needed}, tape has {available}")]
    InsufficientRandomness { needed: u64, available: u64 },

    #[error("parameters outside the admissible region: {}", .0.join("; "))]
    RmuViolation(Vec<String>),

    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("malformed pmf: {0}")]
    MalformedPmf(String),

    #[error("enumeration would visit {leaves} leaves, limit is {limit}")]
    BudgetTooLarge { leaves: u128, limit: u128 },

    #[error("distributions live on different outcome spaces: {0}")]
    MismatchedSpaces(String),

    #[error("instance too large for exact search: {0}")]
    TooLarge(String),

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("stage incompatibility: {0}")]
    StageIncompatible(String),

    #[error("sample too small for requested test: {0}")]
    SampleTooSmall(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

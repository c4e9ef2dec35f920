use thiserror::Error;

/// Errors surfaced by the workbench library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside the reachable window [-{n},{n}]^d")]
    PointOutsideWindow { point: Vec<i64>, n: u64 },

    #[error("range is not a valid walk range: {0}")]
    InvalidRange(String),

    #[error("bad magic bytes in stream header")]
    BadMagic,

    #[error("unsupported stream version {0}")]
    BadVersion(u8),

    #[error("malformed stream header: {0}")]
    BadHeader(String),

    #[error("payload truncated: needed {needed} more bits")]
    TruncatedPayload { needed: u64 },

    #[error("fill-bit section mismatch: {0}")]
    FillBitMismatch(String),

    #[error("enumeration budget exceeded: (2d)^n = {required} > budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("samples mix different walk lengths ({0} vs {1})")]
    MixedSampleLengths(u64, u64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic bytes: expected \"EMB1\"")]
    BadMagic,

    #[error("truncated header: {0} bytes, need 16")]
    TruncatedHeader(usize),

    #[error("payload is {actual} bytes but header (n={n}, d={d}) requires {expected}")]
    PayloadLength {
        n: u64,
        d: u32,
        expected: u128,
        actual: usize,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("embedding set must contain at least one row")]
    EmptySet,

    #[error("embedding dimension must be at least 1")]
    ZeroDimension,

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("parse error at line {line}, field {field}: {text:?}")]
    Parse {
        line: usize,
        field: usize,
        text: String,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{labels} labels supplied for {rows} rows")]
    LabelLength { labels: usize, rows: usize },

    #[error("label on line {0} is empty")]
    EmptyLabel(usize),

    #[error("unknown class {0:?}")]
    UnknownClass(String),

    #[error("k = {k} out of range: only {available} candidate neighbours")]
    KOutOfRange { k: usize, available: usize },

    #[error("too few samples in {set}: need {need}, have {have}")]
    TooFewSamples {
        set: &'static str,
        need: usize,
        have: usize,
    },

    #[error("k = {k} is not a positive multiple of k' = {k_prime}")]
    NotMultiple { k: usize, k_prime: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("labels are required for {0} set")]
    MissingLabels(&'static str),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

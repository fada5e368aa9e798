use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("degenerate bound box: {0}")]
    DegenerateBox(String),

    #[error("non-finite kernel output for pair (i={i}, j={j})")]
    NonFinite { i: usize, j: usize },

    #[error(
        "blow-up at t={t}: max |state component| {value:e} exceeds threshold {threshold:e} \
         (the no-finite-time-blow-up hypothesis fails for this kernel and data)"
    )]
    BlowUp { t: f64, value: f64, threshold: f64 },

    #[error("empty measure")]
    EmptyMeasure,

    #[error("weights sum to {0}, expected 1")]
    Unnormalized(f64),

    #[error("transport problem too large: {rows}x{cols} atoms exceeds cap {cap}; use w1_line for 1-D data or subsample")]
    TooLarge { rows: usize, cols: usize, cap: usize },

    #[error("marginal mismatch: families must have the same sites and site weights (having the same marginal ν)")]
    MarginalMismatch,

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("reference resolution too small: {0}")]
    ReferenceTooSmall(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("resolution check failed: {0}")]
    Resolution(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

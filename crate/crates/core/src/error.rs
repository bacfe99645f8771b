use thiserror::Error;

/// Errors produced by the associative watermarking library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid length for {what}: {len}")]
    InvalidLength { what: &'static str, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("pattern store is empty")]
    EmptyStore,

    #[error("{patterns} patterns exceed the 16-bit weight range")]
    WeightOverflow { patterns: usize },

    #[error("weight bit width undefined for P = {patterns} (needs P >= 2)")]
    WidthUndefined { patterns: usize },

    #[error("crosstalk variance is zero (alpha * gamma = 0)")]
    SingularVariance,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(
        "zero-watermarking needs equal feature and watermark lengths (feature {feature}, watermark {watermark})"
    )]
    ZeroWatermarkLength { feature: usize, watermark: usize },

    #[error("feature length {requested} exceeds the {available} available AC coefficients")]
    FeatureTooLong { requested: usize, available: usize },

    #[error("image is empty")]
    EmptyImage,

    #[error("JPEG quality must be in 1..=100, got {0}")]
    InvalidQuality(i64),

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

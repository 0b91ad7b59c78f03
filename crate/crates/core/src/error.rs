use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by model validation, filtering, estimation, scoring, and
/// data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lag orders must satisfy p + q >= 1 (got p={p}, q={q})")]
    InvalidOrder { p: usize, q: usize },

    #[error("non-negativity violated: {what}")]
    NonNegativityViolation { what: String },

    #[error("stationarity violated: sum(alpha) + sum(beta) = {sum} >= 1")]
    StationarityViolation { sum: f64 },

    #[error("unsupported order (p={p}, q={q}): implemented for p <= 1 and q <= 1")]
    UnsupportedOrder { p: usize, q: usize },

    #[error("conditional variance must be positive (got {value})")]
    NonPositiveVariance { value: f64 },

    #[error("filter dimension {state_dim} does not match parameter dimension {param_dim}")]
    ModeMismatch { state_dim: usize, param_dim: usize },

    #[error("window {window} is smaller than the parameter dimension {dim}")]
    WindowTooSmall { window: usize, dim: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite observation at step {t}: {value}")]
    NonFiniteInput { t: usize, value: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("true volatility must be strictly positive (index {index})")]
    NonPositiveTruth { index: usize },

    #[error("quantile level must lie strictly inside (0, 1) (got {alpha})")]
    AlphaOutOfRange { alpha: f64 },

    #[error("probability must lie strictly inside (0, 1) (got {p})")]
    DomainError { p: f64 },

    #[error("series of length {n} is too short (need at least {min})")]
    SeriesTooShort { n: usize, min: usize },

    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("series is empty")]
    EmptySeries,

    #[error("dates are not strictly increasing at row {row}")]
    NonMonotoneDates { row: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

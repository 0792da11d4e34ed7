use thiserror::Error;

/// Errors raised by the Hawkes toolkit.
#[derive(Debug, Error)]
pub enum HawkesError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid event series: {0}")]
    InvalidSeries(String),

    #[error("invalid trading calendar: {0}")]
    InvalidCalendar(String),

    #[error("time {t} lies outside the observation window [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("unstable parameters: spectral radius {radius:.6} is not below {limit}")]
    Unstable { radius: f64, limit: f64 },

    #[error("total intensity is zero and no events can occur")]
    ZeroIntensity,

    #[error("infeasible parameters: intensity {value:e} at event {index} of dimension {dim}")]
    Infeasible { dim: usize, index: usize, value: f64 },

    #[error("likelihood evaluation produced a non-finite value")]
    NonFinite,

    #[error("event at t={t} lies outside every trading interval")]
    EventOutsideCalendar { t: f64 },

    #[error("dimension {dim} has {count} events, at least {required} are required")]
    TooFewEvents { dim: usize, count: usize, required: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rescaled times are not strictly increasing in dimension {dim} at index {index}")]
    NonMonotone { dim: usize, index: usize },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("ingest: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HawkesError>;

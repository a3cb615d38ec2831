use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside covered range [{lo}, {hi}] in dimension {dim}")]
    OutOfCoverage { dim: usize, value: f64, lo: f64, hi: f64 },

    #[error("Sobol dimension {requested} exceeds the direction-number table ({max})")]
    SobolDimension { requested: usize, max: usize },

    #[error("allocation is inconsistent with the bids: {0}")]
    InconsistentAllocation(String),

    #[error("payment solver failed: {0}")]
    PaymentSolver(String),

    #[error("theorem bound requires independent valuations; use the grid estimate for {0}")]
    CorrelatedDomain(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("strategy file error: {0}")]
    StrategyFile(String),

    #[error("formula error: {0}")]
    Formula(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

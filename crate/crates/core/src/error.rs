use thiserror::Error;

/// Errors raised by the record-statistics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RkrError {
    #[error("pmf has no support points")]
    EmptySupport,
    #[error("negative mass {mass} at value {value}")]
    NegativeMass { value: usize, mass: f64 },
    #[error("masses sum to {sum}, which is not within 1e-9 of 1")]
    NotNormalized { sum: f64 },
    #[error("bad distribution parameter: {0}")]
    BadParam(String),
    #[error("value {0} is outside the support")]
    OutOfSupport(usize),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("index {index} out of range for a sequence of length {len} with window {k}")]
    IndexOutOfRange { index: usize, len: usize, k: usize },
    #[error("sequence of length {len} is too short, need at least {needed}")]
    SequenceTooShort { len: usize, needed: usize },
    #[error("level {0} exceeds the window length")]
    LevelOverflow(usize),
    #[error("conditioning event has probability zero")]
    ZeroMarginal,
    #[error("conditioning level is never reached by any enumerated sequence")]
    ZeroConditioningEvent,
    #[error("enumeration needs {needed} states, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("no replication hit the conditioning event")]
    NoConditioningHits,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, RkrError>;

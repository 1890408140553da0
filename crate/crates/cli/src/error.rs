use rkr_core::RkrError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: value {value} is not a positive integer")]
    NonPositiveValue { line: u64, value: i64 },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] RkrError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::NonPositiveValue { .. } | CliError::Io { .. } => {
                EXIT_DATA
            }
            CliError::Core(e) => match e {
                RkrError::BudgetExceeded { .. }
                | RkrError::ZeroMarginal
                | RkrError::ZeroConditioningEvent
                | RkrError::NoConditioningHits => EXIT_BUDGET,
                RkrError::SequenceTooShort { .. } => EXIT_DATA,
                _ => EXIT_USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

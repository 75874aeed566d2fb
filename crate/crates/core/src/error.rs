use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("digit stream exhausted: a_{index} is not available")]
    DigitsExhausted { index: usize },

    #[error("invalid partial quotient a_{index} = {value} (must be >= 1)")]
    InvalidDigit { index: usize, value: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refinement budget exceeded while {what} (depth {depth})")]
    BudgetExceeded { what: &'static str, depth: usize },

    #[error("value outside the admissible range: {0}")]
    OutOfRange(String),

    #[error("interval family violates the class rules at i = {index}: {reason}")]
    InvalidFamily { index: usize, reason: String },

    #[error("invalid Ostrowski digits at k = {index}: {rule}")]
    InvalidOstrowski { index: usize, rule: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        allowed: String,
    },

    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("table is not a sign table (value {value} at index {index})")]
    NotSignTable { index: usize, value: String },

    #[error("witness rejected: {0}")]
    InvalidWitness(String),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: impl TryInto<i64>, allowed: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            value: value.try_into().unwrap_or(i64::MAX),
            allowed: allowed.into(),
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by problem size rather than malformed input.
    pub fn is_scale_limit(&self) -> bool {
        matches!(self, Error::ScaleLimit(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the recovery library.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands whose shapes do not agree; always a caller bug.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A parameter outside the admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A computation that produced non-finite values or could not proceed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

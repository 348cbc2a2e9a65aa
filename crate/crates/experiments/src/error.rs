use thiserror::Error;

/// Failures of the harness, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] robust_lowrank::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ExpError>;

impl ExpError {
    pub fn config(msg: impl Into<String>) -> Self {
        ExpError::Config(msg.into())
    }

    /// 2 for anything the user can fix by changing inputs, 3 for numerical
    /// breakdowns.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Numerical(_) | ExpError::Core(robust_lowrank::Error::Numerical(_)) => 3,
            _ => 2,
        }
    }
}

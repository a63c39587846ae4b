use thiserror::Error;

/// Errors surfaced by every layer of the emulator.
///
/// The variants mirror the failure classes the command-line front end maps to
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("capacity exceeded: {message}")]
    Capacity {
        message: String,
        /// Backend able to take the instance, when one exists.
        suggestion: Option<String>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>, suggestion: Option<&str>) -> Self {
        Error::Capacity {
            message: msg.into(),
            suggestion: suggestion.map(str::to_owned),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("config error: `{first}` and `{second}` blocks are mutually exclusive")]
    ExclusiveBlocks { first: &'static str, second: &'static str },
    #[error("config error: `{first}` and `{second}` are mutually exclusive")]
    ExclusiveKeys { first: String, second: String },
    #[error("{0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("run cancelled")]
    Cancelled,
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl TransportError {
    /// Process exit status: 1 for anything about the input, 2 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            TransportError::Numerical(_) | TransportError::Cancelled => 2,
            _ => 1,
        }
    }

    pub(crate) fn numerical(e: impl std::fmt::Display) -> Self {
        TransportError::Numerical(e.to_string())
    }
}

//! Crate-wide error type with the CLI exit-code taxonomy.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad configuration or usage (exit code 1).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent data (exit code 2).
    #[error("{0}")]
    Data(String),

    /// Filesystem failure with the offending path (exit code 2).
    #[error("{message}: {path}")]
    Io {
        message: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Server answered with a non-success status (exit code 3).
    #[error("HTTP status {status} for {url}")]
    HttpStatus { status: u16, url: String },

    /// Transport-level failure; retryable, carries the failed URL (exit code 3).
    #[error("network error for {url}: {message}")]
    Network { url: String, message: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn io(
        message: impl Into<String>,
        path: impl Into<PathBuf>,
        source: std::io::Error,
    ) -> Self {
        Error::Io {
            message: message.into(),
            path: path.into(),
            source,
        }
    }

    /// Exit code contract: 0 success, 1 usage/config, 2 data, 3 network.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io { .. } => 2,
            Error::HttpStatus { .. } | Error::Network { .. } => 3,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a row that fails its own inequality check.
pub const EXIT_INCONSISTENT: i32 = 2;
/// Exit status for bad arguments, overrides or config files.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] infobound_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("usage: {0}")]
    Usage(String),

    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Inconsistent(_) => EXIT_INCONSISTENT,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. These are a stable contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const ASSUMPTION_FAIL: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const NONCONVERGENCE: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wclt::Error),

    #[error("{path}: line {line}: {reason}")]
    Csv { path: String, line: u64, reason: String },

    #[error("{path}: {reason}")]
    Input { path: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(wclt::Error::NonConvergence { .. }) => exit::NONCONVERGENCE,
            _ => exit::INPUT,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

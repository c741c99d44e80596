use std::path::PathBuf;

use mfcsr_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    /// Parse or validation failure in an input file.
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const DEGENERATE: u8 = 2;
    pub const INTERNAL: u8 = 3;
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(CoreError::Degenerate { .. }) => exit::DEGENERATE,
            AppError::Core(_)
            | AppError::Io { .. }
            | AppError::Parse { .. }
            | AppError::Config(_)
            | AppError::Usage(_) => exit::INPUT,
            AppError::Internal(_) => exit::INTERNAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Internal(format!("json: {e}"))
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Internal(format!("csv: {e}"))
    }
}

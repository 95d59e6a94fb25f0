use std::path::PathBuf;

use due_core::ErrorCategory;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] due_core::Error),

    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("writing {path}: {msg}")]
    Write { path: PathBuf, msg: String },
}

impl CliError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Read { .. } => ErrorCategory::Parse,
            CliError::Json { source, .. } => match source.classify() {
                serde_json::error::Category::Data => ErrorCategory::Config,
                _ => ErrorCategory::Parse,
            },
            CliError::Config { .. } | CliError::Write { .. } => ErrorCategory::Config,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Parse => 2,
            ErrorCategory::Validation => 3,
            ErrorCategory::Config => 4,
            ErrorCategory::Numeric => 5,
        }
    }

    pub(crate) fn config(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), msg: msg.into() }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        CliError::Write { path: path.into(), msg: msg.to_string() }
    }
}

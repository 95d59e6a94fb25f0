use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the command line driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Validation,
    Config,
    Numeric,
}

impl std::fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorCategory::Parse => "parse",
            ErrorCategory::Validation => "validation",
            ErrorCategory::Config => "config",
            ErrorCategory::Numeric => "numeric",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("CFL condition violated on link {link}: dt = {dt} exceeds L/max(v, w) = {limit}")]
    Cfl { link: String, dt: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{0} outside its domain")]
    Domain(String),

    #[error("loading not advanced to t = {requested} (last loaded time {loaded})")]
    Sequencing { requested: f64, loaded: f64 },

    #[error("unfinished trip: vehicle on path {path} departing in interval {interval} does not exit within the loading horizon")]
    UnfinishedTrip { path: usize, interval: usize },

    #[error("schedule `{spec}` at column {column}: {msg}")]
    Schedule {
        spec: String,
        column: usize,
        msg: String,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("operator evaluation failed at iteration {iteration}: {source}")]
    Operator {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. } | Error::Io { .. } => ErrorCategory::Parse,
            Error::Validation(_) | Error::Dimension(_) | Error::Domain(_) => {
                ErrorCategory::Validation
            }
            Error::Config(_) | Error::Cfl { .. } | Error::Parameter(_) | Error::Schedule { .. } => {
                ErrorCategory::Config
            }
            Error::Sequencing { .. } | Error::UnfinishedTrip { .. } | Error::NonFinite(_) => {
                ErrorCategory::Numeric
            }
            Error::Operator { source, .. } => source.category(),
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

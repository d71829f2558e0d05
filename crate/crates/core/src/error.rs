use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Parameters fall outside the scaling regime an operation is defined for.
    #[error("regime mismatch: {0}")]
    Regime(String),

    /// A statistic has no finite value for the observed data (e.g. zero variance).
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("unknown skew family `{name}` (known: {known})")]
    UnknownFamily { name: String, known: String },

    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed config {path}: {message}")]
    ParseConfig { path: PathBuf, message: String },

    #[error("observer failed: {0}")]
    Observer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Regime(_)
                | Error::UnknownFamily { .. }
                | Error::ReadConfig { .. }
                | Error::ParseConfig { .. }
        )
    }
}

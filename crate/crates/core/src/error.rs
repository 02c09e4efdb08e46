use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("precision error: {what} (estimated relative error {achieved:.3e})")]
    Precision { what: String, achieved: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("solve error: {reason} (condition estimate {condition:.3e})")]
    Solve { reason: String, condition: f64 },
    #[error("resource error: {0}")]
    Resource(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precision(what: impl Into<String>, achieved: f64) -> Self {
        Error::Precision { what: what.into(), achieved }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), message: err.to_string() }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the forward model, the solver and the identification
/// pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("series is empty")]
    EmptySeries,

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("pipeline failure: {0}")]
    Pipeline(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used to pick process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config line {line}: key `{key}`: {reason}")]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("singular pivot in tridiagonal elimination at row {row}")]
    SingularPivot { row: usize },

    #[error("row {row} is not strictly diagonally dominant (D = {margin:e})")]
    NotDominant { row: usize, margin: f64 },

    #[error("positivity time-step restriction violated: dt * rate * exp(spread) = {value:.6} > 1")]
    RestrictionViolated { value: f64 },

    #[error("non-finite value produced at node {node}")]
    NonFinite { node: usize },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("implicit oracle did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::Config { .. } => ErrorKind::Validation,
            Error::Io { .. } => ErrorKind::Io,
            Error::Step { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }
}

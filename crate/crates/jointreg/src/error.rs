//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine (optimizer, root finder, integrator) failed to
    /// reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A requested Kendall's tau is outside the attainable range of the
    /// copula family.
    #[error("tau {tau} unattainable for {family}: attainable range is ({lo}, {hi})")]
    UnattainableTau {
        family: &'static str,
        tau: f64,
        lo: f64,
        hi: f64,
    },

    /// Malformed input data (CSV rows, config fields), with enough context to
    /// locate the offending record.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Invalid harness or CLI configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

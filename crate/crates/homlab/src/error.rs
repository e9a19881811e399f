//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two signals that must share a time base or representation do not.
    #[error("signal mismatch: {0}")]
    SignalMismatch(String),

    /// The sampling grid cannot represent the requested frequency content.
    #[error("undersampled: {0}")]
    Undersampled(String),

    /// An operation is only defined for the other signal representation.
    #[error("representation: {0}")]
    Representation(String),

    /// A phase distribution fails validation (bad weights, values, or the
    /// vanishing-mean-field condition where an operation requires it).
    #[error("phase distribution: {0}")]
    PhaseDistribution(String),

    /// A Fock-space argument is out of range or a state is malformed.
    #[error("fock: {0}")]
    Fock(String),

    /// Statistics pipeline misuse (empty samples, bad levels, ...).
    #[error("stats: {0}")]
    Stats(String),

    /// The optimizer was configured inconsistently.
    #[error("fit: {0}")]
    Fit(String),

    /// Config text failed to parse or validate. `field` is the offending
    /// `section.key` path when one applies.
    #[error("config {field}: {message}")]
    Config { field: String, message: String },

    /// A data file (CSV table) failed to parse. Carries the 1-based line.
    #[error("{path}:{line}: {message}")]
    Table {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical input failed a domain precondition (non-finite field,
    /// invalid quantum number, negative time, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate a type invariant and cannot be repaired.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Rate-matrix assembly produced a negative transition rate.
    #[error("generator construction failed: {0}")]
    Construction(String),

    /// The balance equations are singular beyond the expected one-dimensional
    /// null space; the message lists levels disconnected from the cycle.
    #[error("singular generator: {0}")]
    Singular(String),

    /// The model emits no photons, so contrast is undefined.
    #[error("dark model: photoluminescence rate is zero without microwaves")]
    DarkModel,

    /// A fit cannot determine its free parameters from the observations given.
    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    /// A structured text input (CSV header, config) is unusable as a whole.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}

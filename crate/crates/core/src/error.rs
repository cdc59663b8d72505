//! Error types shared across the crate.

use thiserror::Error;

/// Errors surfaced by ranking, game-construction, simulation and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed in-memory input (non-finite score, bad permutation array, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A size guard was exceeded (factorial/exponential blowup).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A value lies outside the domain a measure or operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inconsistent or infeasible run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A call violated an operation's contract (e.g. feedback too shallow
    /// for the requested estimator).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Internal bookkeeping ended up in an impossible state.
    #[error("state error: {0}")]
    State(String),

    /// Text-format parse failure, with 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// CSV schema mismatch between artifacts being compared.
    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

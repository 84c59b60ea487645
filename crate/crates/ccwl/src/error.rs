//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by complex construction, refinement, logic and game code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument is out of range or otherwise malformed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation is not allowed in the current state of its input.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An input document or structure violates a structural invariant.
    #[error("validation failed: {0}")]
    Validation(String),

    /// An instance exceeds a configured size cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A formula text could not be parsed.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A formula was evaluated under a valuation that leaves a free variable unbound.
    #[error("unbound free variable x{0}")]
    UnboundVariable(usize),

    /// No formula separates the two inputs because they are not distinguished.
    #[error("no separating formula: {0}")]
    NoSeparator(String),

    /// A game certificate breaks the rules at the given step.
    #[error("certificate invalid at step {step}: {reason}")]
    CertificateInvalid { step: usize, reason: String },

    /// A file could not be read or written.
    #[error("i/o error: {0}")]
    Io(String),
}

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(format!("malformed JSON document: {e}"))
    }
}

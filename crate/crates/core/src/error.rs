//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A lookup table or prime list does not cover the requested range.
    #[error("insufficient coverage: {0}")]
    Range(String),

    /// The request exceeds a configured memory or enumeration budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// An evaluation point lies outside the function's domain.
    #[error("outside domain: {0}")]
    Domain(String),

    /// Malformed text input (weight files, corpus files, checkpoints).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

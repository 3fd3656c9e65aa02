use std::fmt;

use thiserror::Error;

/// Everything that can go wrong while building or querying an index.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(Operation),
    #[error("unsupported query shape: {0}")]
    UnsupportedShape(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Operations that are only available for some weight modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    /// Two-sided intervals need an inverse to take prefix differences.
    IntervalWithoutInverse,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::IntervalWithoutInverse => {
                f.write_str("interval queries require invertible (group) weights")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

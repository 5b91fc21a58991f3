//! Error types shared by all pipeline stages.

use thiserror::Error;

/// Errors produced by parsing, aggregation, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input text does not match the declared format. Carries the first
    /// offending line so batch logs point at the problem directly.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Series lengths, grids, or q/scale axes do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operation received a quantity kind it is not defined for.
    #[error("quantity kind: {0}")]
    Kind(String),

    /// Non-finite or otherwise unusable numeric input.
    #[error("invalid data: {0}")]
    Data(String),

    /// Configuration or specification parameter out of range.
    #[error("invalid parameter: {0}")]
    Param(String),
}

pub type Result<T> = std::result::Result<T, Error>;

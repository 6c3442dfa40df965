use crate::ring::Mode;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("coefficient mode mismatch: {0} vs {1}")]
    ModeMismatch(Mode, Mode),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("strict collapse of off-diagonal monomial: {0}")]
    OffDiagonal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("grading inconsistency: {0}")]
    Grading(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no solution: {0}")]
    Unsolvable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
    pub fn grading(msg: impl Into<String>) -> Self {
        Error::Grading(msg.into())
    }
}

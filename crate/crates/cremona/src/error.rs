use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Word or payload syntax errors (CLI exit code 2).
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Invalid mathematical input: excluded parameters, collinear points,
    /// maps outside an operation's supported class, and so on (exit code 2).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A base point or singular point exists but is not rational.
    #[error("unaccounted base point: {0}")]
    UnaccountedBasePoint(String),

    #[error("irrational singular locus: {0}")]
    IrrationalSingularLocus(String),

    /// Composition degree exceeded the configured cap.
    #[error("degree cap exceeded: degree {degree} > cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    /// A condition guaranteed by the underlying theory failed to hold.
    /// Any occurrence is a bug or a counterexample (exit code 3).
    #[error("internal check failed: {0}")]
    InternalCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn internal(msg: impl Into<String>) -> Error {
        Error::InternalCheck(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidInput(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by the normal form engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("invalid weights ({p1}, {p2}): the weights must be coprime")]
    InvalidWeights { p1: u32, p2: u32 },

    #[error("{what} is not quasi-homogeneous for the given weights")]
    NotQuasiHomogeneous { what: String },

    #[error("inexact division: nonzero remainder in degree {degree}")]
    NotDivisible { degree: i64 },

    #[error("field is not logarithmic along the separatrix (remainder in degree {degree})")]
    NotLogarithmic { degree: i64 },

    #[error("inconsistent context: {0}")]
    InvalidContext(String),

    #[error("h has a non-isolated singularity: {0}")]
    NonIsolated(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported pipeline: {0}")]
    Unsupported(String),

    #[error("element is not in the Jacobian ideal: degree slice {degree} fails")]
    NotInJacobianIdeal { degree: u32 },

    #[error("structured complement is not a complement of Im(X0) in degree {degree}")]
    StructureFailure { degree: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

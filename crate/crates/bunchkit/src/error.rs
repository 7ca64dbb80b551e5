use thiserror::Error;

/// Crate-wide error type.
///
/// Variants fall into two families: input validation (a caller handed us
/// something that violates a documented precondition) and internal faults
/// (a self-consistency check that should hold by construction failed).
/// The CLI maps the former to exit code 2 and the latter to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("totals mismatch: {0}")]
    TotalsMismatch(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not unitary: {0}")]
    NotUnitary(String),
    #[error("invalid mode subset: {0}")]
    InvalidModeSubset(String),
    #[error("invalid occupation: {0}")]
    InvalidOccupation(String),
    #[error("invalid state description: {0}")]
    InvalidStateSpec(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("internal consistency fault: {0}")]
    InternalFault(String),
}

impl Error {
    /// True for errors that indicate a broken internal invariant rather
    /// than bad input.
    pub fn is_internal_fault(&self) -> bool {
        matches!(self, Error::InternalFault(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QuditError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuditError {
    #[error("invalid dimension {dim}: expected {expected}")]
    InvalidDimension { dim: usize, expected: &'static str },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("not a valid quantum state: {0}")]
    NotAState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order is not a permutation: {0}")]
    Permutation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("size {size} exceeds the limit of {limit}")]
    Size { size: usize, limit: usize },
    #[error("index {index} out of range for {len} candidates")]
    Index { index: usize, len: usize },
    #[error("hessian could not be factorized even after regularization")]
    SingularHessian,
    #[error("utility law mismatch: {0}")]
    LawMismatch(String),
    #[error("invalid edges: {0}")]
    Edge(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

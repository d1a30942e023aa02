use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("lattice is not even: diagonal entry {0} is odd")]
    NotEven(i64),
    #[error("lattice is degenerate")]
    Degenerate,
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("lattice is not definite")]
    NotDefinite,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("subgroup is not isotropic")]
    NotIsotropic,
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

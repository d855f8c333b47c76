use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("outside the lattice: {0}")]
    OutOfLattice(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("missing value: {0}")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, Error>;

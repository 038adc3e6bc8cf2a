use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("distance must be strictly positive, got {0}")]
    ZeroDistance(f64),

    #[error("linear system is numerically singular: {0}")]
    SingularSystem(String),

    #[error("bisection did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("N = {n} is not divisible by group size {group_size}")]
    IndivisibleGroups { n: usize, group_size: usize },

    #[error("N = {n} exceeds the configured cap of {cap} elements for the N^2-dimensional quadratic")]
    MemoryGuard { n: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

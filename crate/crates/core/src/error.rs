use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("probability {value} at {location} is outside [0, 1]")]
    InvalidProbability { value: f64, location: String },

    #[error("label {label} is outside the label space 1..={k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("zero variance mass at node pair ({0}, {1})")]
    ZeroVariance(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HgError {
    #[error("ambient dimension {0} is not a positive multiple of 4")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric is not symmetric (residual {0:e})")]
    NotSymmetric(f64),

    #[error("metric is singular")]
    SingularMetric,

    #[error("matrix does not square to -I (residual {0:e})")]
    NotComplexStructure(f64),

    #[error("(g, H) is not an almost (H,G)-structure: {0}")]
    IncompatibleStructure(String),

    #[error("structure constants are not skew at (i, j, k) = ({i}, {j}, {k})")]
    NonSkew { i: usize, j: usize, k: usize },

    #[error("structure constants violate the Jacobi identity (relative residual {0:e})")]
    Jacobi(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HgError>;

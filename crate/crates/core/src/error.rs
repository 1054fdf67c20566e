use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteinError {
    #[error("operation undefined for the zero operator")]
    ZeroOperator,
    #[error("rescaling factor must be nonzero")]
    ZeroScale,
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("unsupported distribution: {0}")]
    Unsupported(String),
    #[error("operator has degree {0} in M; a linear-coefficient form needs degree <= 1")]
    NotLinear(usize),
    #[error("need at least {needed} initial moments, got {got}")]
    InsufficientMoments { needed: usize, got: usize },
    #[error("moment recurrence leading coefficient vanishes at k = {k}")]
    VanishingLeading { k: usize },
    #[error("initial moments inconsistent with the recurrence at k = {k}")]
    InconsistentMoments { k: usize },
    #[error("moment index {index} unavailable: {reason}")]
    MomentUnavailable { index: usize, reason: String },
    #[error("matrix is {rows}x{cols}, determinant needs a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SteinError>;

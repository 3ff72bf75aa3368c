use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty map")]
    EmptyMap,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("negative time: t = {0}")]
    NegativeTime(f64),

    #[error("time must be positive: t = {0}")]
    NonPositiveTime(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("map is not monotone at index {0}")]
    NotMonotone(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("count too small: need at least {need}, got {got}")]
    CountTooSmall { need: usize, got: usize },

    #[error("support exceeds grid: atom {index} at {point:?}")]
    SupportExceedsGrid { index: usize, point: Vec<f64> },

    #[error("empty basis")]
    EmptyBasis,

    #[error("infeasible: constraint residual stalled at {residual:e} after {iterations} iterations")]
    Infeasible { residual: f64, iterations: usize },

    #[error("degenerate deformation in cell {cell}: {reason}")]
    DegenerateDeformation { cell: usize, reason: String },

    #[error("inconsistent gauge problem: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

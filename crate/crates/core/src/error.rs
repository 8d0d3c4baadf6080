use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("su(n) requires n >= 2, got {0}")]
    InvalidDimension(usize),
    #[error("expected {expected} algebra coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("matrix shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not in SU(n): unitarity defect {drift:e}, |det - 1| = {det:e}")]
    NotInGroup { drift: f64, det: f64 },
    #[error("invalid torus grid: {0}")]
    InvalidGrid(String),
    #[error("dyadic level {level} exceeds the grid's maximum usable level {max}")]
    LevelTooHigh { level: i32, max: i32 },
    #[error("dyadic level must be >= -1, got {0}")]
    LevelTooLow(i32),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("concatenation endpoints differ: {first:?} vs {second:?}")]
    EndpointMismatch { first: [f64; 2], second: [f64; 2] },
    #[error("invalid lasso: {0}")]
    InvalidLasso(String),
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("time grids differ")]
    GridMismatch,
    #[error("point ({0}, {1}) lies outside the grid window")]
    OutsideWindow(f64, f64),
    #[error("area schedule must be nondecreasing and start at 0")]
    InvalidSchedule,
    #[error("field does not match its header: {0}")]
    BadFieldFile(String),
    #[error("malformed path file: {0}")]
    BadPathFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

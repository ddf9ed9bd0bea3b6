use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("buffer holds {got} samples but the grid has {expected}")]
    Shape { expected: usize, got: usize },

    #[error("direct transform limited to {limit} points, grid has {points}")]
    OracleTooLarge { points: usize, limit: usize },

    #[error("frequency lattice too coarse: {0}")]
    Aliasing(String),

    #[error("bump radius {radius} outside admissible interval ({lower}, {upper}]")]
    BumpRadius { radius: f64, lower: f64, upper: f64 },

    #[error("index {0} is not part of the symbol family")]
    IndexOutOfFamily(String),

    #[error("family kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: &'static str, found: &'static str },

    #[error("spectrum not band-limited: relative tail {tail:e} outside |xi| <= {radius}")]
    Truncation { tail: f64, radius: f64 },

    #[error("piece {index} violates the support condition: relative tail {tail:e} outside radius {radius}")]
    Support { index: String, tail: f64, radius: f64 },

    #[error("invalid exponent {name} = {value} (must lie in [1, inf])")]
    InvalidExponent { name: &'static str, value: f64 },

    #[error("interpolation parameter theta = {0} must lie strictly inside (0, 1)")]
    Theta(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("overflow guard: {0}")]
    Overflow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

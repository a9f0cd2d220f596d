use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("function has {values} values but the grid has {nodes} nodes")]
    LengthMismatch { values: usize, nodes: usize },

    #[error("exponent must exceed 1, got {value} at s = {radius}")]
    ExponentTooSmall { value: f64, radius: f64 },

    #[error("degenerate reaction: q = {exponent:e} at s = {radius} where u = {value:e}")]
    DegenerateReaction { radius: f64, exponent: f64, value: f64 },

    #[error("Luxemburg norm did not converge: {0}")]
    NormNoConvergence(String),

    #[error("shell [{lo}, {hi}] is not contained in [0, {outer}]")]
    ShellOutsideGrid { lo: f64, hi: f64, outer: f64 },

    #[error("no negative-energy seed: {0}")]
    NoNegativeSeed(String),

    #[error("mountain-pass geometry failure: {0}")]
    Geometry(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("singular linear system at row {0}")]
    Singular(usize),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

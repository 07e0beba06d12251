use thiserror::Error;

/// Errors produced by grid construction, coefficient generation, the linear
/// solvers and the time integrators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time grid is not strictly increasing at node {index} (t[{index}] = {value}, previous = {previous})")]
    NonMonotoneGrid { index: usize, value: f64, previous: f64 },

    #[error("node triple ({0}, {1}, {2}) is not strictly increasing")]
    NonMonotoneNodes(f64, f64, f64),

    #[error("degenerate node triple: scaled Vandermonde condition number {condition:e} exceeds {bound:e}")]
    DegenerateNodes { condition: f64, bound: f64 },

    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("problem size {size} exceeds the dense limit of {limit} unknowns")]
    TooLarge { size: usize, limit: usize },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("dense factorization failed: operator is not positive definite")]
    NotPositiveDefinite,

    #[error("Runge-Kutta step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("problem has no exact solution")]
    NoExactSolution,

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

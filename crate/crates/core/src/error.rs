use thiserror::Error;

/// Errors surfaced by construction, extraction, certification and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Level-curve curvature is undefined where the gradient vanishes.
    #[error("gradient degenerate at ({x}, {y}): |grad u| = {grad_norm:e}")]
    DegenerateGradient { x: f64, y: f64, grad_norm: f64 },

    /// The anchor point is not in the superlevel set (epsilon too large).
    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("extracted component touches the window edge; enlarge the window or decrease epsilon")]
    EnclosureViolation,

    /// Component count kept changing up to the maximum refinement.
    #[error("superlevel component count did not stabilize at {nx}x{ny}")]
    IndeterminateCount { nx: usize, ny: usize },

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("certificate failure: {0}")]
    Certificate(String),

    /// Critical points and superlevel components disagree (resolution too coarse).
    #[error("cross-check failed: {0}")]
    Inconsistent(String),

    #[error("linear solver stalled: residual {residual:e} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },

    #[error("no solution found: {0}")]
    NoSolution(String),

    #[error("eigenvalue iteration failed: {0}")]
    EigenFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

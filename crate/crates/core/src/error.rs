use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "assumption A2 violated for component {component} at ({x:.6}, {y:.6}): \
         V - (1+eps)/4 Omega^2 |x|^2 = {value:.3e}"
    )]
    TrapTooWeak { component: usize, x: f64, y: f64, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("negative density weight {value:.3e} at quadrature point {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("zero pivot in ILU(0) factorization at row {row}")]
    ZeroPivot { row: usize },

    #[error("metric operator of component {component} is not positive definite")]
    IndefiniteMetric { component: usize },

    #[error("linear solve for component {component} failed to converge (relative residual {residual:.3e})")]
    SolveFailed { component: usize, residual: f64 },

    #[error("cannot retract: column {component} has zero mass")]
    ZeroColumn { component: usize },

    #[error("phase alignment undefined for component {component}: vanishing overlap")]
    AlignmentUndefined { component: usize },

    #[error("degenerate state in component {component}: Gram denominator {value:.3e}")]
    DegenerateState { component: usize, value: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("domain error: {0}")]
    Domain(String),
}

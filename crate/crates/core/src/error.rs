use thiserror::Error;

/// Errors raised by grid construction, field operations and solvers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: String, got: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cutoff support touches the box boundary ({0})")]
    CutoffSupport(String),

    #[error("rotated footprint exits the box (R margin too small: {0})")]
    RotationFootprint(String),

    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("fixed point is not contracting (observed factor {factor:.3}); increase r")]
    NotContracting { factor: f64 },

    #[error("zero-norm probe rejected")]
    ZeroProbe,

    #[error("empty probed set: {0}")]
    EmptyProbeSet(String),
}

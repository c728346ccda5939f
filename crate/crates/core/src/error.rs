use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("numeric failure in {what} (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    #[error("horizon limit did not converge; last two estimates {last:e} and {previous:e}")]
    LimitFailure { last: f64, previous: f64 },

    #[error("level set is unbounded along direction {direction:?}")]
    Geometry { direction: Vec<f64> },

    #[error("degenerate horizon shape: minimum normalized radius {min_radial:e} < {threshold:e}")]
    DegenerateShape { min_radial: f64, threshold: f64 },

    #[error("horizon shape has not converged: last Hausdorff gap {gap:e} > {tolerance:e}")]
    NotConverged { gap: f64, tolerance: f64 },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("unbounded linear program")]
    Unbounded,

    #[error("dataset is not linearly separable (best margin {margin:e})")]
    NotSeparable { margin: f64 },

    #[error("no separable sample after {attempts} attempts; move the centers further apart")]
    Generation { attempts: usize },

    #[error("trajectory too short: final norm {achieved:e} below required {required:e}")]
    TrajectoryTooShort { achieved: f64, required: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

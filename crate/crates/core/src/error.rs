use thiserror::Error;

/// Errors surfaced by geometric primitives and the optimizers built on them.
#[derive(Debug, Error)]
pub enum GeoError {
    /// Two arguments live on different manifolds or have different base points.
    #[error("manifold contract violation: {0}")]
    ContractViolation(String),

    /// Logarithm or transport requested across the cut locus.
    #[error("cut locus: {0}")]
    CutLocus(String),

    /// A construction or algorithm parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A sample does not satisfy the hypothesis of the inequality being checked.
    #[error("hypothesis not satisfied: {0}")]
    HypothesisViolated(String),

    /// Floating-point breakdown (non-finite values, failed decomposition).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl GeoError {
    /// Attach iteration context to an error propagating out of a solver loop.
    pub fn at_iteration(self, k: usize) -> GeoError {
        match self {
            GeoError::CutLocus(m) => GeoError::CutLocus(format!("iteration {k}: {m}")),
            GeoError::Numerical(m) => GeoError::Numerical(format!("iteration {k}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;

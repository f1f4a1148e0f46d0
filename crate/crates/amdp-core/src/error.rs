use thiserror::Error;

/// Errors surfaced by the exact tabular layer.
#[derive(Debug, Error)]
pub enum CoreError {
    /// The unichain/ergodicity assumption the solvers rely on does not hold
    /// for the given instance (or a numerical residual says it likely fails).
    #[error("ASSUMPTION_VIOLATED: {0}")]
    AssumptionViolated(String),

    /// An input is outside the mathematical domain of the operation,
    /// e.g. a log-based regularizer gradient at a zero-probability action.
    #[error("DOMAIN_ERROR: {0}")]
    DomainError(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Iterative solver exhausted its iteration budget.
    #[error("NO_CONVERGENCE: {0}")]
    NoConvergence(String),

    /// Model or policy data violates a structural invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

use amdp_core::CoreError;
use linear_fa::FaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CriticError {
    /// A TD iterate became non-finite.
    #[error("DIVERGENCE: non-finite iterate at eta={eta}, epoch {epoch}, step {step}")]
    Divergence { eta: f64, epoch: usize, step: usize },

    /// The requested perturbation floor cannot produce a valid policy.
    #[error("INVALID_PERTURBATION: {0}")]
    InvalidPerturbation(String),

    #[error(transparent)]
    Fa(#[from] FaError),

    #[error(transparent)]
    Core(#[from] CoreError),
}

use amdp_core::CoreError;
use critics::CriticError;
use linear_fa::FaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActorError {
    #[error("DIVERGENCE at iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("critic failed at iteration {iteration}: {source}")]
    Critic {
        iteration: usize,
        source: CriticError,
    },

    #[error(transparent)]
    Fa(#[from] FaError),

    #[error(transparent)]
    Core(#[from] CoreError),
}

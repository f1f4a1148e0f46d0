use amdp_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FaError {
    /// Feature matrix lost rank, or its Gram matrix is numerically singular.
    #[error("FEATURE_DEGENERATE: {0}")]
    FeatureDegenerate(String),

    /// The projected operator is not strongly monotone on this instance.
    #[error("MONOTONICITY_VIOLATED: {0}")]
    MonotonicityViolated(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

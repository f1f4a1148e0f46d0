//! Linear function approximation over state-action pairs: feature maps, the
//! stationary weighted geometry, the projected Bellman fixed point, operator
//! monotonicity constants, and instance-dependent noise diagnostics.

pub mod error;
pub mod features;
pub mod noise;
pub mod projected;

pub use error::FaError;
pub use features::{build_exact_features, build_random_features, FeatureMap, ANGLE_THRESHOLD};
pub use noise::{noise_diagnostics, operator_covariance, NoiseDiagnostics};
pub use projected::{
    deterministic_operator, monotonicity_constant, monotonicity_constant_raw,
    perturbed_monotonicity_floor, projected_fixed_point, weighting_matrix, ProjectedModel,
};

/// Feature Gram matrices with smallest eigenvalue at or below this are
/// rejected outright instead of being regularized.
pub const MU_TOL: f64 = 1e-12;

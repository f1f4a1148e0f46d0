//! Exact tabular machinery for average-cost MDPs: the model and policy types,
//! induced Markov chains, stationary/mixing analysis, convex policy
//! regularizers, differential value functions, and a ground-truth optimal-policy
//! solver. Everything here is deterministic linear algebra at tabular scale and
//! serves as the oracle layer against which the stochastic components are
//! certified.

pub mod chain;
pub mod error;
pub mod model;
pub mod numeric;
pub mod optimal;
pub mod regularizer;
pub mod values;

pub use chain::{
    induced_state_action_kernel, induced_state_kernel, mixing_bound_check, mixing_time,
    stationary_distribution, stationary_info, StationaryInfo, DEFAULT_T_MAX,
};
pub use error::CoreError;
pub use model::{pair_index, Policy, TabularAmdp, SIMPLEX_TOL};
pub use optimal::{optimality_residual, solve_optimal, OptimalSolution};
pub use regularizer::{expected_kl, kl_divergence, RegKind, Regularizer};
pub use values::{
    average_cost, differential_values, performance_difference_rhs, policy_gradient,
    DifferentialValues, BELLMAN_TOL,
};

/// Residual tolerance for stationary distributions.
pub const STATIONARY_TOL: f64 = 1e-10;

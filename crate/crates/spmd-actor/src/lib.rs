//! Stochastic policy mirror descent for average-cost MDPs: closed-form KL
//! proximal updates against estimated differential Q-functions, pluggable
//! critics, the theory step-size schedules, and the low-dimensional policy
//! recursion under shared features.

pub mod actor;
pub mod error;
pub mod lowdim;
pub mod prox;
pub mod schedule;
pub mod vi;

pub use actor::{
    estimate_gamma, estimate_kappa, spmd_run, CriticChoice, IterRecord, OutputRule, PolicyTrace,
    ScheduleChoice, SpmdConfig,
};
pub use error::ActorError;
pub use lowdim::LowDimPolicy;
pub use prox::kl_prox_update;
pub use schedule::{q_oracle, stepsize_thm3, stepsize_thm4};
pub use vi::{monotonicity_residual, vi_residual};

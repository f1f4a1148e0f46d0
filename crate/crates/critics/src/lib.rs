//! Policy evaluators for average-cost MDPs: the multiple-trajectory method
//! under generative access, and variance-reduced temporal difference methods
//! (plain and exploratory) under Markovian noise, plus the perturbed-policy
//! construction and the parameter schedules the theory prescribes.

pub mod config;
pub mod error;
pub mod multi_traj;
pub mod output;
pub mod perturb;
pub mod report;
pub mod vrtd;

pub use config::{vrtd_default_schedule, vrtd_fixed_schedule, MultiTrajConfig, VrtdConfig};
pub use error::CriticError;
pub use multi_traj::{multiple_trajectory_evaluate, multiple_trajectory_expectation};
pub use output::{CriticOutput, EpochRecord, QEstimate};
pub use perturb::{
    construct_perturbed_policy, effective_underline_pi, underline_pi_bound, PerturbedPolicy,
};
pub use report::{critic_error_report, ErrorReport};
pub use vrtd::{evrtd_run, vrtd_run};

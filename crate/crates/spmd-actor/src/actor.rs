//! The mirror-descent driver: critic step, prox step, diagnostics, and
//! seed-derived randomness for every component.

use amdp_core::{
    average_cost, differential_values, expected_kl, induced_state_action_kernel,
    induced_state_kernel, solve_optimal, stationary_distribution, Policy, RegKind, Regularizer,
    TabularAmdp,
};
use critics::{
    effective_underline_pi, evrtd_run, multiple_trajectory_evaluate, vrtd_run, MultiTrajConfig,
    QEstimate, VrtdConfig,
};
use linear_fa::{monotonicity_constant_raw, weighting_matrix, FeatureMap};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use samplers::{derive_seed, GenerativeOracle, InitState, TrajectorySimulator};
use serde::{Deserialize, Serialize};

use crate::error::ActorError;
use crate::lowdim::LowDimPolicy;
use crate::prox::kl_prox_update;
use crate::schedule::{stepsize_thm3, stepsize_thm4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRule {
    /// Return a uniformly drawn iterate (the unregularized guarantee).
    UniformRandomIterate,
    /// Return the final iterate (the regularized guarantee).
    LastIterate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleChoice {
    /// Constant step from the square-root schedule; `kappa` falls back to a
    /// probe-based estimate when absent.
    ConstantThm3 { kappa: Option<f64> },
    /// Constant step for regularized runs; `gamma` falls back to a probe
    /// estimate, and without `q` only the deterministic branch applies.
    RegularizedThm4 { gamma: Option<f64>, q: Option<f64> },
    /// Explicit per-iteration steps (one value is broadcast).
    User(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticChoice {
    MultipleTrajectory(MultiTrajConfig),
    Vrtd {
        features: FeatureMap,
        cfg: VrtdConfig,
    },
    /// Exploratory variant; a missing `cfg.underline_pi` means the floor is
    /// recomputed each iteration from the exact chain quantities.
    Evrtd {
        features: FeatureMap,
        cfg: VrtdConfig,
    },
    /// The exact differential Q-function; zero samples.
    ExactOracle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpmdConfig {
    pub k_iters: usize,
    pub schedule: ScheduleChoice,
    pub critic: CriticChoice,
    pub output_rule: OutputRule,
    pub seed: u64,
    /// Record `D(pi_k, pi*)` per iteration (solves for the optimum once).
    #[serde(default)]
    pub record_distance: bool,
    /// Drive the policy through the low-dimensional coefficient recursion
    /// instead of materialized prox updates (linear critics only).
    #[serde(default)]
    pub low_dim: bool,
    /// Keep every iterate `pi_0 ...pi_K` in the trace.
    #[serde(default)]
    pub keep_iterates: bool,
}

#[derive(Debug, Clone)]
pub struct IterRecord {
    pub k: usize,
    /// Exact (regularized) average cost of the iterate.
    pub rho: f64,
    pub lambda: f64,
    pub critic_samples: u64,
    pub dist_to_opt: Option<f64>,
    /// Whether the critic's exploratory perturbation was active.
    pub perturbed: bool,
}

#[derive(Debug, Clone)]
pub struct PolicyTrace {
    pub records: Vec<IterRecord>,
    /// The policy selected by the output rule.
    pub output_policy: Policy,
    /// Iterate index of `output_policy` (`k_iters` for the last iterate).
    pub output_index: usize,
    pub last_policy: Policy,
    pub theta_tilde: Option<DVector<f64>>,
    pub total_samples: u64,
    /// The step size(s) actually used.
    pub lambdas: Vec<f64>,
    /// All iterates including the final one, when requested.
    pub iterates: Vec<Policy>,
}

/// Probe-based bound on the shifted sup-norm of exact differential
/// Q-functions: the uniform policy, a greedy policy, and random policies.
pub fn estimate_kappa(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    n_random: usize,
    seed: u64,
) -> Result<f64, ActorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (mdp.n_states, mdp.n_actions);
    let mut probes = vec![Policy::uniform(n, m)];
    let dv_uniform = differential_values(mdp, &probes[0], reg)?;
    let greedy: Vec<usize> = (0..n)
        .map(|s| {
            (0..m)
                .min_by(|&a, &b| {
                    dv_uniform.q_bar[s * m + a]
                        .partial_cmp(&dv_uniform.q_bar[s * m + b])
                        .unwrap()
                })
                .unwrap()
        })
        .collect();
    probes.push(Policy::deterministic(&greedy, m));
    for _ in 0..n_random {
        probes.push(random_policy(&mut rng, n, m));
    }
    let mut kappa = 0.0f64;
    for pi in &probes {
        let dv = differential_values(mdp, pi, reg)?;
        kappa = kappa.max(amdp_core::numeric::centered_sup_norm(dv.q_bar.as_slice()).0);
    }
    Ok(kappa.max(1e-12))
}

/// Probe-based ergodicity bound `Gamma = 1 - min_pi min_s nu^pi(s)` over all
/// vertex policies (when enumerable within `vertex_cap`) plus random
/// policies. A probe estimate: the true constant quantifies over every policy.
pub fn estimate_gamma(
    mdp: &TabularAmdp,
    n_random: usize,
    vertex_cap: usize,
    seed: u64,
) -> Result<f64, ActorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (mdp.n_states, mdp.n_actions);
    let mut min_mass = f64::INFINITY;
    let mut consider = |pi: &Policy| -> Result<(), ActorError> {
        let p = induced_state_kernel(mdp, pi)?;
        let nu = stationary_distribution(&p)?;
        min_mass = min_mass.min(nu.iter().cloned().fold(f64::INFINITY, f64::min));
        Ok(())
    };
    let n_vertices = (m as f64).powi(n as i32);
    if n_vertices <= vertex_cap as f64 {
        let mut actions = vec![0usize; n];
        loop {
            consider(&Policy::deterministic(&actions, m))?;
            let mut digit = 0;
            loop {
                if digit == n {
                    break;
                }
                actions[digit] += 1;
                if actions[digit] < m {
                    break;
                }
                actions[digit] = 0;
                digit += 1;
            }
            if digit == n {
                break;
            }
        }
    } else {
        for _ in 0..vertex_cap {
            let actions: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
            consider(&Policy::deterministic(&actions, m))?;
        }
    }
    consider(&Policy::uniform(n, m))?;
    for _ in 0..n_random {
        let pi = random_policy(&mut rng, n, m);
        consider(&pi)?;
    }
    Ok((1.0 - min_mass).clamp(1e-12, 1.0 - 1e-12))
}

fn random_policy(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Policy {
    let probs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.02).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
            row
        })
        .collect();
    Policy { probs }
}

/// Runs stochastic policy mirror descent from the uniform policy.
pub fn spmd_run(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    cfg: &SpmdConfig,
) -> Result<PolicyTrace, ActorError> {
    if cfg.k_iters < 1 {
        return Err(ActorError::Config("k_iters must be >= 1".into()));
    }
    let (n, m) = (mdp.n_states, mdp.n_actions);
    if cfg.low_dim {
        match (&cfg.critic, reg.kind) {
            (
                CriticChoice::Vrtd { .. } | CriticChoice::Evrtd { .. },
                RegKind::None | RegKind::NegativeEntropy,
            ) => {}
            _ => {
                return Err(ActorError::Config(
                    "low_dim mode needs a linear critic and a softmax-compatible regularizer"
                        .into(),
                ))
            }
        }
    }

    // optimum-side diagnostics
    let star = if cfg.record_distance {
        let sol = solve_optimal(mdp, reg, 1e-10)?;
        let p = induced_state_kernel(mdp, &sol.policy)?;
        let nu = stationary_distribution(&p)?;
        Some((sol, nu))
    } else {
        None
    };

    // step-size schedule
    let lambdas: Vec<f64> = match &cfg.schedule {
        ScheduleChoice::User(v) => {
            if v.len() == cfg.k_iters {
                v.clone()
            } else if v.len() == 1 {
                vec![v[0]; cfg.k_iters]
            } else {
                return Err(ActorError::Config(format!(
                    "user schedule has {} entries for {} iterations",
                    v.len(),
                    cfg.k_iters
                )));
            }
        }
        ScheduleChoice::ConstantThm3 { kappa } => {
            let kappa = match kappa {
                Some(k) => *k,
                None => estimate_kappa(mdp, reg, 16, derive_seed(cfg.seed, "kappa-probe", 0))?,
            };
            vec![stepsize_thm3(kappa, cfg.k_iters, m); cfg.k_iters]
        }
        ScheduleChoice::RegularizedThm4 { gamma, q } => {
            if reg.omega <= 0.0 {
                return Err(ActorError::Config(
                    "the regularized schedule needs omega > 0".into(),
                ));
            }
            let gamma = match gamma {
                Some(g) => *g,
                None => estimate_gamma(mdp, 64, 4096, derive_seed(cfg.seed, "gamma-probe", 0))?,
            };
            vec![stepsize_thm4(reg.omega, gamma, cfg.k_iters, *q); cfg.k_iters]
        }
    };

    let output_index = match cfg.output_rule {
        OutputRule::LastIterate => cfg.k_iters,
        OutputRule::UniformRandomIterate => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "output-rule", 0));
            rng.gen_range(0..cfg.k_iters)
        }
    };

    let mut pi = Policy::uniform(n, m);
    let mut low_state = match &cfg.critic {
        CriticChoice::Vrtd { features, .. } | CriticChoice::Evrtd { features, .. }
            if cfg.low_dim =>
        {
            Some(LowDimPolicy::new(features.dim))
        }
        _ => None,
    };
    let mut warm_theta: Option<DVector<f64>> = None;
    let mut output_policy = (output_index == 0).then(|| pi.clone());
    let mut records = Vec::with_capacity(cfg.k_iters);
    let mut iterates = Vec::new();
    let mut total_samples = 0u64;

    for k in 0..cfg.k_iters {
        if cfg.keep_iterates {
            iterates.push(pi.clone());
        }
        let rho = average_cost(mdp, &pi, reg)?;
        let dist = star
            .as_ref()
            .map(|(sol, nu_star)| expected_kl(nu_star, &sol.policy, &pi));

        let h = reg.h_table(&pi);
        let (q_table, theta_out, samples, perturbed) = match &cfg.critic {
            CriticChoice::ExactOracle => {
                let dv = differential_values(mdp, &pi, reg)?;
                (dv.q_bar.as_slice().to_vec(), None, 0u64, false)
            }
            CriticChoice::MultipleTrajectory(mt) => {
                let mut oracle =
                    GenerativeOracle::new(mdp, derive_seed(cfg.seed, "critic-kernel", k as u64));
                let out = multiple_trajectory_evaluate(
                    &mut oracle,
                    &pi,
                    &h,
                    mt,
                    derive_seed(cfg.seed, "critic-actions", k as u64),
                );
                (out.q.to_table(None), None, out.samples_used, false)
            }
            CriticChoice::Vrtd { features, cfg: vc } => {
                let mut sim = TrajectorySimulator::new(
                    mdp,
                    pi.clone(),
                    derive_seed(cfg.seed, "critic-traj", k as u64),
                    InitState::UniformRandom,
                );
                let theta0 = warm_theta
                    .clone()
                    .unwrap_or_else(|| DVector::zeros(features.dim));
                let out = vrtd_run(&mut sim, features, &h, vc, &theta0)
                    .map_err(|source| ActorError::Critic { iteration: k, source })?;
                let theta = match &out.q {
                    QEstimate::Linear { theta } => theta.clone(),
                    _ => unreachable!(),
                };
                (
                    out.q.to_table(Some(features)),
                    Some(theta),
                    out.samples_used,
                    out.perturbation_active,
                )
            }
            CriticChoice::Evrtd { features, cfg: vc } => {
                let mut vc = vc.clone();
                if vc.underline_pi.is_none() {
                    vc.underline_pi = oracle_floor(mdp, &pi, features)?;
                }
                let mut sim = TrajectorySimulator::new(
                    mdp,
                    pi.clone(),
                    derive_seed(cfg.seed, "critic-traj", k as u64),
                    InitState::UniformRandom,
                );
                let theta0 = warm_theta
                    .clone()
                    .unwrap_or_else(|| DVector::zeros(features.dim));
                let out = if vc.underline_pi.is_some() {
                    evrtd_run(&mut sim, features, &h, &vc, &theta0)
                } else {
                    vrtd_run(&mut sim, features, &h, &vc, &theta0)
                }
                .map_err(|source| ActorError::Critic { iteration: k, source })?;
                let theta = match &out.q {
                    QEstimate::Linear { theta } => theta.clone(),
                    _ => unreachable!(),
                };
                (
                    out.q.to_table(Some(features)),
                    Some(theta),
                    out.samples_used,
                    out.perturbation_active,
                )
            }
        };
        total_samples += samples;
        records.push(IterRecord {
            k,
            rho,
            lambda: lambdas[k],
            critic_samples: samples,
            dist_to_opt: dist,
            perturbed,
        });
        warm_theta = theta_out.clone();

        pi = match (&mut low_state, &cfg.critic, theta_out) {
            (Some(state), CriticChoice::Vrtd { features, .. }, Some(theta))
            | (Some(state), CriticChoice::Evrtd { features, .. }, Some(theta)) => {
                *state = state.step(&theta, lambdas[k], reg.omega);
                state.to_policy(features, n, m)
            }
            _ => kl_prox_update(&pi, &q_table, lambdas[k], reg).map_err(|e| match e {
                ActorError::Divergence { detail, .. } => ActorError::Divergence {
                    iteration: k,
                    detail,
                },
                other => other,
            })?,
        };
        if k + 1 == output_index {
            output_policy = Some(pi.clone());
        }
    }
    if cfg.keep_iterates {
        iterates.push(pi.clone());
    }

    Ok(PolicyTrace {
        records,
        output_policy: match cfg.output_rule {
            OutputRule::LastIterate => pi.clone(),
            OutputRule::UniformRandomIterate => {
                output_policy.expect("output iterate recorded during the run")
            }
        },
        output_index,
        last_policy: pi,
        theta_tilde: low_state.map(|s| s.theta_tilde),
        total_samples,
        lambdas,
        iterates,
    })
}

/// Oracle-mode exploration floor for the current iterate: the restricted
/// monotonicity modulus and the stationary floor feed the guarantee bound.
/// `None` means no state needs perturbing at the resulting floor.
fn oracle_floor(
    mdp: &TabularAmdp,
    pi: &Policy,
    features: &FeatureMap,
) -> Result<Option<f64>, ActorError> {
    let p_state = induced_state_kernel(mdp, pi)?;
    let nu = stationary_distribution(&p_state)?;
    let nu_min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = weighting_matrix(&nu, pi);
    let p_pair = induced_state_action_kernel(mdp, pi)?;
    let one_minus_beta = monotonicity_constant_raw(features, &d, &p_pair)?.max(0.0);
    Ok(effective_underline_pi(pi, one_minus_beta, nu_min))
}

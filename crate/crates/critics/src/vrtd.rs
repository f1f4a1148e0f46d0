//! Variance-reduced temporal difference evaluation under Markovian noise.
//!
//! Each epoch first estimates the average cost from skipped state-action
//! observations, then freezes an anchor gradient from a batch of skipped
//! transition samples, and finally runs a recentered stochastic-approximation
//! inner loop whose average is the epoch output. The exploratory variant
//! draws the leading action of anchor and inner samples from a perturbed
//! policy and reduces (bitwise) to the plain method when no state needs
//! perturbing.

use amdp_core::pair_index;
use linear_fa::FeatureMap;
use nalgebra::DVector;
use samplers::{TrajectorySimulator, TransitionSample};

use crate::config::VrtdConfig;
use crate::error::CriticError;
use crate::output::{CriticOutput, EpochRecord, QEstimate};
use crate::perturb::construct_perturbed_policy;

enum SampleMode<'p> {
    Plain,
    Perturbed(&'p amdp_core::Policy),
}

impl SampleMode<'_> {
    fn draw(&self, sim: &mut TrajectorySimulator, tau: usize) -> TransitionSample {
        match self {
            SampleMode::Plain => sim.skip_and_sample(tau),
            SampleMode::Perturbed(pi_tilde) => sim.perturbed_skip_and_sample(tau, pi_tilde),
        }
    }
}

/// Plain VRTD on the simulator's own policy. `h_state` holds the per-state
/// regularizer values added to sampled costs; pass zeros when unregularized.
pub fn vrtd_run(
    sim: &mut TrajectorySimulator,
    features: &FeatureMap,
    h_state: &[f64],
    cfg: &VrtdConfig,
    theta0: &DVector<f64>,
) -> Result<CriticOutput, CriticError> {
    run_inner(sim, features, h_state, cfg, theta0, SampleMode::Plain, false)
}

/// Exploratory VRTD: anchor and inner samples interleave one action from the
/// perturbed policy built at `cfg.underline_pi`. When every support set is
/// full the perturbation is inert and the run is identical to [`vrtd_run`].
pub fn evrtd_run(
    sim: &mut TrajectorySimulator,
    features: &FeatureMap,
    h_state: &[f64],
    cfg: &VrtdConfig,
    theta0: &DVector<f64>,
) -> Result<CriticOutput, CriticError> {
    let floor = cfg.underline_pi.ok_or_else(|| {
        CriticError::InvalidPerturbation("exploratory run requires underline_pi".into())
    })?;
    let perturbed = construct_perturbed_policy(sim.policy(), floor)?;
    if !perturbed.active {
        return run_inner(sim, features, h_state, cfg, theta0, SampleMode::Plain, false);
    }
    run_inner(
        sim,
        features,
        h_state,
        cfg,
        theta0,
        SampleMode::Perturbed(&perturbed.policy),
        true,
    )
}

fn run_inner(
    sim: &mut TrajectorySimulator,
    features: &FeatureMap,
    h_state: &[f64],
    cfg: &VrtdConfig,
    theta0: &DVector<f64>,
    mode: SampleMode<'_>,
    perturbation_active: bool,
) -> Result<CriticOutput, CriticError> {
    cfg.validate().map_err(CriticError::InvalidPerturbation)?;
    let d = features.dim;
    let n_actions = sim.policy().n_actions();
    assert_eq!(theta0.len(), d, "theta0 dimension mismatch");
    let start_transitions = sim.transitions();

    let mut theta_hat = theta0.clone();
    let mut epochs = Vec::with_capacity(cfg.k_epochs);
    let mut rho_tilde = 0.0;
    for k in 1..=cfg.k_epochs {
        // average-cost estimate from skipped on-policy observations
        let n_prime = cfg.n_prime_k[k - 1];
        let mut acc = 0.0;
        for _ in 0..n_prime {
            let (s, a, c) = sim.skip_and_observe(cfg.tau_prime);
            let _ = a;
            acc += c + h_state[s];
        }
        rho_tilde = acc / n_prime as f64;

        // anchor gradient at the recentering point
        let anchor = theta_hat.clone();
        let mut g_hat = vec![0.0; d];
        for _ in 0..cfg.n_k[k - 1] {
            let xi = mode.draw(sim, cfg.tau_prime);
            let lead = features.row(pair_index(xi.s, xi.a, n_actions));
            let lag = features.row(pair_index(xi.s_next, xi.a_next, n_actions));
            let mut td = rho_tilde - (xi.cost + h_state[xi.s]);
            for j in 0..d {
                td += (lead[j] - lag[j]) * anchor[j];
            }
            for j in 0..d {
                g_hat[j] += td * lead[j];
            }
        }
        let inv_n = 1.0 / cfg.n_k[k - 1] as f64;
        g_hat.iter_mut().for_each(|v| *v *= inv_n);

        // recentered inner loop; the epoch output is the iterate average
        let mut theta = anchor.clone();
        let mut sum = DVector::<f64>::zeros(d);
        for t in 1..=cfg.t_inner {
            sum += &theta;
            let xi = mode.draw(sim, cfg.tau);
            let lead = features.row(pair_index(xi.s, xi.a, n_actions));
            let lag = features.row(pair_index(xi.s_next, xi.a_next, n_actions));
            let mut w = 0.0;
            for j in 0..d {
                w += (lead[j] - lag[j]) * (theta[j] - anchor[j]);
            }
            if !w.is_finite() {
                return Err(CriticError::Divergence {
                    eta: cfg.eta,
                    epoch: k,
                    step: t,
                });
            }
            for j in 0..d {
                theta[j] -= cfg.eta * (w * lead[j] + g_hat[j]);
            }
        }
        theta_hat = sum / cfg.t_inner as f64;
        if theta_hat.iter().any(|v| !v.is_finite()) {
            return Err(CriticError::Divergence {
                eta: cfg.eta,
                epoch: k,
                step: cfg.t_inner,
            });
        }
        epochs.push(EpochRecord {
            epoch: k,
            rho_hat: rho_tilde,
            theta: theta_hat.clone(),
            samples_used: sim.transitions() - start_transitions,
        });
    }

    Ok(CriticOutput {
        rho_hat: rho_tilde,
        q: QEstimate::Linear { theta: theta_hat },
        samples_used: sim.transitions() - start_transitions,
        epochs,
        perturbation_active,
    })
}

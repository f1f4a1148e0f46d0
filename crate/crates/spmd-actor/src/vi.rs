//! Variational-inequality residuals certifying (approximate) optimality.

use amdp_core::{differential_values, pair_index, Policy, Regularizer, TabularAmdp};
use nalgebra::DVector;

use crate::error::ActorError;

/// `E_{s ~ nu*}[ <Qbar^{pi*}(s,.), pi(.|s) - pi*(.|s)> + h^pi(s) - h^{pi*}(s) ]`.
/// Nonnegative (up to tolerance) for every `pi` exactly when `pi*` is optimal.
pub fn vi_residual(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    pi: &Policy,
    pi_star: &Policy,
    nu_star: &DVector<f64>,
) -> Result<f64, ActorError> {
    let dv_star = differential_values(mdp, pi_star, reg)?;
    Ok(weighted_gap(mdp, reg, &dv_star.q_bar, pi, pi_star, nu_star))
}

/// The generalized-monotonicity form with the roles swapped: the inner
/// product uses the probe policy's own `Qbar^pi`.
pub fn monotonicity_residual(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    pi: &Policy,
    pi_star: &Policy,
    nu_star: &DVector<f64>,
) -> Result<f64, ActorError> {
    let dv = differential_values(mdp, pi, reg)?;
    Ok(weighted_gap(mdp, reg, &dv.q_bar, pi, pi_star, nu_star))
}

fn weighted_gap(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    q_bar: &DVector<f64>,
    pi: &Policy,
    pi_star: &Policy,
    nu_star: &DVector<f64>,
) -> f64 {
    let mut acc = 0.0;
    for s in 0..mdp.n_states {
        let mut inner = 0.0;
        for a in 0..mdp.n_actions {
            inner += q_bar[pair_index(s, a, mdp.n_actions)]
                * (pi.probs[s][a] - pi_star.probs[s][a]);
        }
        acc += nu_star[s] * (inner + reg.h_state(pi, s) - reg.h_state(pi_star, s));
    }
    acc
}

//! Average cost, differential value functions, and the exact policy gradient.

use nalgebra::{DMatrix, DVector};

use crate::chain::{induced_state_action_kernel, induced_state_kernel, stationary_distribution};
use crate::error::CoreError;
use crate::model::{pair_index, Policy, TabularAmdp};
use crate::regularizer::Regularizer;

/// Residual tolerance for the differential Bellman equations.
pub const BELLMAN_TOL: f64 = 1e-10;

/// Long-run average (regularized) cost `rho^pi = <nu, c^pi + h^pi>`.
pub fn average_cost(mdp: &TabularAmdp, pi: &Policy, reg: &Regularizer) -> Result<f64, CoreError> {
    let p = induced_state_kernel(mdp, pi)?;
    let nu = stationary_distribution(&p)?;
    let mut rho = 0.0;
    for s in 0..mdp.n_states {
        let mut c_pi = 0.0;
        for a in 0..mdp.n_actions {
            c_pi += pi.probs[s][a] * mdp.cost[s][a];
        }
        rho += nu[s] * (c_pi + reg.h_state(pi, s));
    }
    Ok(rho)
}

/// The basic differential value functions of a policy.
///
/// Both are anchored so that their mean under the stationary state-action
/// weights is zero, which picks out the representative equal to the series
/// `sum_t E[c_t + h_t - rho]`.
#[derive(Debug, Clone)]
pub struct DifferentialValues {
    pub v_bar: DVector<f64>,
    /// Indexed in pair order.
    pub q_bar: DVector<f64>,
    pub rho: f64,
    /// Stationary state-action weights used for the anchoring.
    pub nu_sa: DVector<f64>,
}

/// Solves the differential Bellman system
/// `(I - P^pi) Q = c + h - rho 1` with the anchor `<nu_sa, Q> = 0`.
///
/// The anchor row is folded into the matrix as `I - P^pi + 1 nu_sa^T`, which
/// is nonsingular exactly when the solution set is a single line, so any
/// remaining singularity reports a violated unichain assumption.
pub fn differential_values(
    mdp: &TabularAmdp,
    pi: &Policy,
    reg: &Regularizer,
) -> Result<DifferentialValues, CoreError> {
    pi.check_shape(mdp)?;
    let (n, m) = (mdp.n_states, mdp.n_actions);
    let n_pairs = n * m;

    let p_state = induced_state_kernel(mdp, pi)?;
    let nu = stationary_distribution(&p_state)?;
    let h = reg.h_table(pi);

    let mut rho = 0.0;
    let mut nu_sa = DVector::zeros(n_pairs);
    for s in 0..n {
        for a in 0..m {
            let w = nu[s] * pi.probs[s][a];
            nu_sa[pair_index(s, a, m)] = w;
            rho += w * mdp.cost[s][a];
        }
        rho += nu[s] * h[s];
    }

    let p_pair = induced_state_action_kernel(mdp, pi)?;
    let mut system = DMatrix::<f64>::identity(n_pairs, n_pairs) - &p_pair;
    for i in 0..n_pairs {
        for j in 0..n_pairs {
            system[(i, j)] += nu_sa[j];
        }
    }
    let mut rhs = DVector::zeros(n_pairs);
    for s in 0..n {
        for a in 0..m {
            rhs[pair_index(s, a, m)] = mdp.cost[s][a] + h[s] - rho;
        }
    }
    let q_bar = system.lu().solve(&rhs).ok_or_else(|| {
        CoreError::AssumptionViolated("differential system singular beyond the constant line".into())
    })?;

    let residual = (&q_bar - &p_pair * &q_bar - &rhs).abs().max();
    if residual > BELLMAN_TOL {
        return Err(CoreError::AssumptionViolated(format!(
            "Bellman residual {residual:e} exceeds {BELLMAN_TOL:e}"
        )));
    }

    let mut v_bar = DVector::zeros(n);
    for s in 0..n {
        for a in 0..m {
            v_bar[s] += pi.probs[s][a] * q_bar[pair_index(s, a, m)];
        }
    }
    Ok(DifferentialValues {
        v_bar,
        q_bar,
        rho,
        nu_sa,
    })
}

/// Exact gradient of the average cost:
/// `d rho / d pi(a|s) = nu(s) (Qbar(s,a) + grad h(s,a))`.
pub fn policy_gradient(
    mdp: &TabularAmdp,
    pi: &Policy,
    reg: &Regularizer,
) -> Result<Vec<Vec<f64>>, CoreError> {
    let dv = differential_values(mdp, pi, reg)?;
    let p_state = induced_state_kernel(mdp, pi)?;
    let nu = stationary_distribution(&p_state)?;
    let mut grad = vec![vec![0.0; mdp.n_actions]; mdp.n_states];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            grad[s][a] = nu[s] * (dv.q_bar[pair_index(s, a, mdp.n_actions)] + reg.grad(pi, s, a)?);
        }
    }
    Ok(grad)
}

/// Right-hand side of the performance-difference identity:
/// `E_{s ~ nu^{pi'}}[<Qbar^pi(s,.), pi'(.|s) - pi(.|s)> + h^{pi'}(s) - h^pi(s)]`,
/// which equals `rho(pi') - rho(pi)`.
pub fn performance_difference_rhs(
    mdp: &TabularAmdp,
    reg: &Regularizer,
    pi: &Policy,
    pi_prime: &Policy,
) -> Result<f64, CoreError> {
    let dv = differential_values(mdp, pi, reg)?;
    let p_prime = induced_state_kernel(mdp, pi_prime)?;
    let nu_prime = stationary_distribution(&p_prime)?;
    let mut acc = 0.0;
    for s in 0..mdp.n_states {
        let mut inner = 0.0;
        for a in 0..mdp.n_actions {
            inner += dv.q_bar[pair_index(s, a, mdp.n_actions)]
                * (pi_prime.probs[s][a] - pi.probs[s][a]);
        }
        acc += nu_prime[s] * (inner + reg.h_state(pi_prime, s) - reg.h_state(pi, s));
    }
    Ok(acc)
}

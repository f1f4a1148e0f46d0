//! Instance-dependent noise diagnostics: the covariance of the whitened
//! stochastic operator at the fixed point and the trace functional it drives.

use amdp_core::{induced_state_kernel, stationary_distribution, Policy, TabularAmdp};
use nalgebra::{DMatrix, DVector};

use crate::error::FaError;
use crate::features::{dot, FeatureMap};
use crate::projected::ProjectedModel;

#[derive(Debug, Clone)]
pub struct NoiseDiagnostics {
    /// Covariance of `B^{-1/2} gtilde(theta*, rho*, xi)` under the stationary
    /// sampling distribution.
    pub sigma_bar: DMatrix<f64>,
    /// `22 trace{(I-M)^{-1} Sigma (I-M)^{-T}} + 4/(mu (1-beta)^2) ||Qbar* - Psi theta*||_D^2`.
    pub w1: f64,
}

/// Exact enumeration of the covariance of `B^{-1/2} gtilde(theta, rho, xi)`
/// over all transitions `s ~ nu, a ~ pi_sampling(.|s), s' ~ P(.|s,a),
/// a' ~ pi_target(.|s')`.
///
/// The stochastic operator is the average-reward one,
/// `(<psi(s,a) - psi(s',a'), theta> - c(s,a) + rho) psi(s,a)`; its direction
/// is fixed per `(s,a)`, so second moments group by the leading pair.
#[allow(clippy::too_many_arguments)]
pub fn operator_covariance(
    mdp: &TabularAmdp,
    features: &FeatureMap,
    b_inv_sqrt: &DMatrix<f64>,
    theta: &DVector<f64>,
    cost_eff: &DVector<f64>,
    rho: f64,
    nu: &DVector<f64>,
    pi_sampling: &Policy,
    pi_target: &Policy,
) -> DMatrix<f64> {
    let d = features.dim;
    let m = mdp.n_actions;
    let phi = features.matrix() * b_inv_sqrt;

    let mut mean = DVector::<f64>::zeros(d);
    let mut second = DMatrix::<f64>::zeros(d, d);
    for s in 0..mdp.n_states {
        for a in 0..m {
            let p_lead = nu[s] * pi_sampling.probs[s][a];
            if p_lead == 0.0 {
                continue;
            }
            let i = s * m + a;
            let lead_dot = dot(features.row(i), theta.as_slice());
            let mut r_mass = 0.0;
            let mut r2_mass = 0.0;
            for sp in 0..mdp.n_states {
                let p_next = mdp.kernel[s][a][sp];
                if p_next == 0.0 {
                    continue;
                }
                for ap in 0..m {
                    let w = p_lead * p_next * pi_target.probs[sp][ap];
                    if w == 0.0 {
                        continue;
                    }
                    let j = sp * m + ap;
                    let r = lead_dot - dot(features.row(j), theta.as_slice()) - cost_eff[i] + rho;
                    r_mass += w * r;
                    r2_mass += w * r * r;
                }
            }
            let phi_row: Vec<f64> = (0..d).map(|j| phi[(i, j)]).collect();
            for j in 0..d {
                mean[j] += r_mass * phi_row[j];
                for k in 0..d {
                    second[(j, k)] += r2_mass * phi_row[j] * phi_row[k];
                }
            }
        }
    }
    second - &mean * mean.transpose()
}

/// Covariance plus the trace functional of the evaluation-noise bound.
pub fn noise_diagnostics(
    mdp: &TabularAmdp,
    model: &ProjectedModel,
    features: &FeatureMap,
    pi_sampling: &Policy,
    pi_target: &Policy,
) -> Result<NoiseDiagnostics, FaError> {
    let d = features.dim;
    let p_state = induced_state_kernel(mdp, pi_target)?;
    let nu = stationary_distribution(&p_state)?;
    let sigma_bar = operator_covariance(
        mdp,
        features,
        &model.b_inv_sqrt,
        &model.theta_star,
        &model.cost_eff,
        model.rho_star,
        &nu,
        pi_sampling,
        pi_target,
    );

    let identity = DMatrix::<f64>::identity(d, d);
    let inv = (identity - &model.m_matrix)
        .lu()
        .try_inverse()
        .ok_or_else(|| FaError::MonotonicityViolated("I - M is singular".into()))?;
    let trace_term = (&inv * &sigma_bar * inv.transpose()).trace();

    let psi_theta = features.apply(&model.theta_star);
    let approx_sq = model.d_norm_sq(&(&model.q_bar_star - psi_theta));
    let w1 = 22.0 * trace_term
        + 4.0 / (model.mu * model.one_minus_beta * model.one_minus_beta) * approx_sq;

    Ok(NoiseDiagnostics { sigma_bar, w1 })
}

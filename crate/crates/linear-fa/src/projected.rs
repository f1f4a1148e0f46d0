//! The stationary weighted geometry and the projected Bellman fixed point.

use amdp_core::{
    differential_values, induced_state_action_kernel, induced_state_kernel,
    stationary_distribution, Policy, Regularizer, TabularAmdp,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::FaError;
use crate::features::FeatureMap;
use crate::MU_TOL;

/// Diagonal of the natural weighting matrix: entry `(s,a)` is
/// `nu(s) * pi(a|s)` in pair order. The diagonal sums to one.
pub fn weighting_matrix(nu: &DVector<f64>, pi: &Policy) -> DVector<f64> {
    let m = pi.n_actions();
    let mut d = DVector::zeros(nu.len() * m);
    for s in 0..nu.len() {
        for a in 0..m {
            d[s * m + a] = nu[s] * pi.probs[s][a];
        }
    }
    d
}

/// The deterministic operator
/// `g(theta, rho) = Psi^T D (Psi theta - P Psi theta - c + rho 1)`.
pub fn deterministic_operator(
    features: &FeatureMap,
    d_diag: &DVector<f64>,
    p_pair: &DMatrix<f64>,
    cost: &DVector<f64>,
    theta: &DVector<f64>,
    rho: f64,
) -> DVector<f64> {
    let psi_theta = features.apply(theta);
    let residual = &psi_theta - p_pair * &psi_theta - cost + DVector::from_element(cost.len(), rho);
    let mut out = DVector::zeros(features.dim);
    for i in 0..features.n_pairs {
        let w = d_diag[i] * residual[i];
        if w == 0.0 {
            continue;
        }
        for (j, &v) in features.row(i).iter().enumerate() {
            out[j] += w * v;
        }
    }
    out
}

/// `Psi^T diag(d) Psi`.
fn gram(features: &FeatureMap, d_diag: &DVector<f64>) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(features.dim, features.dim);
    for i in 0..features.n_pairs {
        let w = d_diag[i];
        if w == 0.0 {
            continue;
        }
        let row = features.row(i);
        for j in 0..features.dim {
            let wj = w * row[j];
            for k in j..features.dim {
                b[(j, k)] += wj * row[k];
            }
        }
    }
    for j in 0..features.dim {
        for k in 0..j {
            b[(j, k)] = b[(k, j)];
        }
    }
    b
}

fn symmetric_inv_sqrt(b: &DMatrix<f64>) -> Result<DMatrix<f64>, FaError> {
    let eig = SymmetricEigen::new(b.clone());
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= MU_TOL {
            return Err(FaError::FeatureDegenerate(format!(
                "Gram matrix eigenvalue {lambda:e} at or below {MU_TOL:e}"
            )));
        }
        let inv_sqrt = 1.0 / lambda.sqrt();
        for i in 0..b.nrows() {
            scaled[(i, j)] *= inv_sqrt;
        }
    }
    Ok(&scaled * eig.eigenvectors.transpose())
}

/// Strong-monotonicity modulus of the projected operator:
/// `1 - beta = inf { x^T D (I - P) x : x in span(Psi), ||x||_D = 1 }`.
///
/// Computed as the smallest eigenvalue of the symmetrized operator after
/// whitening by the Gram matrix. Directions on which the `D`-seminorm
/// vanishes are quotiented out, so weighting diagonals with zero entries
/// (insufficiently random policies) are handled exactly.
pub fn monotonicity_constant(
    features: &FeatureMap,
    d_diag: &DVector<f64>,
    p_pair: &DMatrix<f64>,
) -> Result<f64, FaError> {
    let value = monotonicity_constant_raw(features, d_diag, p_pair)?;
    if value <= 0.0 {
        return Err(FaError::MonotonicityViolated(format!(
            "projected operator modulus {value:e} is not positive"
        )));
    }
    Ok(value)
}

/// Same as [`monotonicity_constant`] but returns nonpositive values instead of
/// erroring, for diagnostics.
pub fn monotonicity_constant_raw(
    features: &FeatureMap,
    d_diag: &DVector<f64>,
    p_pair: &DMatrix<f64>,
) -> Result<f64, FaError> {
    let psi = features.matrix();
    let d_mat = DMatrix::from_diagonal(d_diag);
    let a_full = psi.transpose() * &d_mat * (DMatrix::identity(features.n_pairs, features.n_pairs) - p_pair) * &psi;
    let a_sym = (&a_full + a_full.transpose()) * 0.5;
    let b = gram(features, d_diag);

    let eig_b = SymmetricEigen::new(b);
    let lambda_max = eig_b.eigenvalues.max();
    if lambda_max <= MU_TOL {
        return Err(FaError::FeatureDegenerate(
            "weighting annihilates the whole feature span".into(),
        ));
    }
    let keep: Vec<usize> = (0..eig_b.eigenvalues.len())
        .filter(|&j| eig_b.eigenvalues[j] > 1e-12 * lambda_max)
        .collect();
    let mut whiten = DMatrix::zeros(features.dim, keep.len());
    for (col, &j) in keep.iter().enumerate() {
        let scale = 1.0 / eig_b.eigenvalues[j].sqrt();
        for i in 0..features.dim {
            whiten[(i, col)] = eig_b.eigenvectors[(i, j)] * scale;
        }
    }
    let reduced = whiten.transpose() * a_sym * &whiten;
    let reduced_sym = (&reduced + reduced.transpose()) * 0.5;
    Ok(SymmetricEigen::new(reduced_sym).eigenvalues.min())
}

/// Guaranteed lower bound on the monotonicity modulus under the perturbed
/// weighting: `min{ 27 alpha (1-beta) / 32, (1 - alpha (1-beta)) / 8 }`.
pub fn perturbed_monotonicity_floor(one_minus_beta: f64, alpha: f64) -> f64 {
    (27.0 * alpha * one_minus_beta / 32.0).min((1.0 - alpha * one_minus_beta) / 8.0)
}

/// Solves the projected Bellman equation
/// `Psi^T D Psi theta = Psi^T D P Psi theta + Psi^T D (c - rho 1)`.
pub fn projected_fixed_point(
    features: &FeatureMap,
    d_diag: &DVector<f64>,
    p_pair: &DMatrix<f64>,
    cost: &DVector<f64>,
    rho_star: f64,
) -> Result<DVector<f64>, FaError> {
    let psi = features.matrix();
    let d_mat = DMatrix::from_diagonal(d_diag);
    let system = psi.transpose()
        * &d_mat
        * (DMatrix::identity(features.n_pairs, features.n_pairs) - p_pair)
        * &psi;
    let rhs = psi.transpose() * &d_mat * (cost - DVector::from_element(cost.len(), rho_star));
    let theta = system.clone().lu().solve(&rhs).ok_or_else(|| {
        FaError::MonotonicityViolated("projected Bellman system is singular".into())
    })?;
    let residual = (&system * &theta - &rhs).abs().max();
    if residual > 1e-10 {
        return Err(FaError::MonotonicityViolated(format!(
            "projected Bellman residual {residual:e} exceeds 1e-10"
        )));
    }
    Ok(theta)
}

/// Per-policy linear-FA bundle: the weighting, the whitened geometry, the
/// fixed point, the monotonicity modulus, and the approximation error against
/// the exact differential Q-function.
#[derive(Debug, Clone)]
pub struct ProjectedModel {
    /// Stationary distribution of the evaluated policy.
    pub nu: DVector<f64>,
    /// Diagonal weighting (natural or perturbed).
    pub d_weights: DVector<f64>,
    pub b_gram: DMatrix<f64>,
    pub b_inv_sqrt: DMatrix<f64>,
    /// `Phi = Psi B^{-1/2}`, D-orthonormal columns.
    pub phi: DMatrix<f64>,
    /// Smallest Gram eigenvalue.
    pub mu: f64,
    /// `M = Phi^T D P Phi`, the action of `P` on the whitened span.
    pub m_matrix: DMatrix<f64>,
    pub theta_star: DVector<f64>,
    pub one_minus_beta: f64,
    /// Shift aligning the exact Q-function with the fixed point in `D`-norm.
    pub b_hat: f64,
    /// `Qbar + b_hat 1`: the representative the fixed point approximates.
    pub q_bar_star: DVector<f64>,
    /// `|| Psi theta* - q_bar_star ||_inf`.
    pub eps_approx: f64,
    pub rho_star: f64,
    /// Effective cost (model cost plus regularizer) in pair order.
    pub cost_eff: DVector<f64>,
}

impl ProjectedModel {
    /// Builds the bundle for evaluating `pi`. The weighting uses
    /// `weight_policy` when given (the perturbed-sampling case) and `pi`
    /// itself otherwise; the transition operator and the stationary state
    /// distribution always belong to `pi`.
    pub fn build(
        mdp: &TabularAmdp,
        pi: &Policy,
        reg: &Regularizer,
        features: &FeatureMap,
        weight_policy: Option<&Policy>,
    ) -> Result<Self, FaError> {
        if features.n_pairs != mdp.n_pairs() {
            return Err(FaError::FeatureDegenerate(format!(
                "feature map covers {} pairs, model has {}",
                features.n_pairs,
                mdp.n_pairs()
            )));
        }
        let p_state = induced_state_kernel(mdp, pi)?;
        let nu = stationary_distribution(&p_state)?;
        let d_diag = weighting_matrix(&nu, weight_policy.unwrap_or(pi));
        let p_pair = induced_state_action_kernel(mdp, pi)?;

        let b_gram = gram(features, &d_diag);
        let eig = SymmetricEigen::new(b_gram.clone());
        let mu = eig.eigenvalues.min();
        if mu <= MU_TOL {
            return Err(FaError::FeatureDegenerate(format!(
                "Gram matrix smallest eigenvalue {mu:e} at or below {MU_TOL:e}"
            )));
        }
        let b_inv_sqrt = symmetric_inv_sqrt(&b_gram)?;
        let phi = features.matrix() * &b_inv_sqrt;
        let d_mat = DMatrix::from_diagonal(&d_diag);
        let m_matrix = phi.transpose() * &d_mat * &p_pair * &phi;
        let one_minus_beta = monotonicity_constant(features, &d_diag, &p_pair)?;

        let dv = differential_values(mdp, pi, reg)?;
        let h = reg.h_table(pi);
        let mut cost_eff = DVector::zeros(mdp.n_pairs());
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                cost_eff[s * mdp.n_actions + a] = mdp.cost[s][a] + h[s];
            }
        }
        let theta_star = projected_fixed_point(features, &d_diag, &p_pair, &cost_eff, dv.rho)?;

        // D-weighted least-squares shift: b_hat = <D, Psi theta* - Qbar>
        let psi_theta = features.apply(&theta_star);
        let mut b_hat = 0.0;
        for i in 0..mdp.n_pairs() {
            b_hat += d_diag[i] * (psi_theta[i] - dv.q_bar[i]);
        }
        let q_bar_star = &dv.q_bar + DVector::from_element(mdp.n_pairs(), b_hat);
        let eps_approx = (&psi_theta - &q_bar_star).abs().max();

        Ok(ProjectedModel {
            nu,
            d_weights: d_diag,
            b_gram,
            b_inv_sqrt,
            phi,
            mu,
            m_matrix,
            theta_star,
            one_minus_beta,
            b_hat,
            q_bar_star,
            eps_approx,
            rho_star: dv.rho,
            cost_eff,
        })
    }

    /// `||x||_D^2` against this model's weighting, `x` in pair order.
    pub fn d_norm_sq(&self, x: &DVector<f64>) -> f64 {
        x.iter()
            .zip(self.d_weights.iter())
            .map(|(v, w)| w * v * v)
            .sum()
    }
}

//! Markov chains induced by a policy: state and state-action transition
//! matrices, stationary distributions, and mixing-time analysis.

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;
use crate::model::{pair_index, Policy, TabularAmdp};
use crate::regularizer::Regularizer;
use crate::STATIONARY_TOL;

/// Default cap on the mixing-time search.
pub const DEFAULT_T_MAX: usize = 100_000;

/// State transition matrix `P_pi(s, s') = sum_a pi(a|s) P(s'|s,a)`.
pub fn induced_state_kernel(mdp: &TabularAmdp, pi: &Policy) -> Result<DMatrix<f64>, CoreError> {
    pi.check_shape(mdp)?;
    let n = mdp.n_states;
    let mut out = DMatrix::zeros(n, n);
    for s in 0..n {
        for a in 0..mdp.n_actions {
            let w = pi.probs[s][a];
            if w == 0.0 {
                continue;
            }
            let row = mdp.kernel_row(s, a);
            for sp in 0..n {
                out[(s, sp)] += w * row[sp];
            }
        }
    }
    Ok(out)
}

/// State-action transition matrix
/// `P^pi((s,a),(s',a')) = P(s'|s,a) pi(a'|s')`, in pair order.
pub fn induced_state_action_kernel(
    mdp: &TabularAmdp,
    pi: &Policy,
) -> Result<DMatrix<f64>, CoreError> {
    pi.check_shape(mdp)?;
    let (n, m) = (mdp.n_states, mdp.n_actions);
    let mut out = DMatrix::zeros(n * m, n * m);
    for s in 0..n {
        for a in 0..m {
            let i = pair_index(s, a, m);
            let row = mdp.kernel_row(s, a);
            for sp in 0..n {
                let p = row[sp];
                if p == 0.0 {
                    continue;
                }
                for ap in 0..m {
                    out[(i, pair_index(sp, ap, m))] = p * pi.probs[sp][ap];
                }
            }
        }
    }
    Ok(out)
}

/// Stationary distribution of a row-stochastic matrix, solved exactly from the
/// balance equations with the normalization constraint folded in.
///
/// The augmented system `(I - P^T + 1 1^T) nu = 1` is nonsingular exactly when
/// the chain has a one-dimensional stationary space, so a failed solve or a
/// large residual both indicate a violated unichain assumption.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>, CoreError> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(CoreError::DimensionMismatch("kernel must be square".into()));
    }
    let mut a = DMatrix::<f64>::identity(n, n) - p.transpose();
    a.add_scalar_mut(1.0);
    let b = DVector::from_element(n, 1.0);
    let mut nu = a
        .lu()
        .solve(&b)
        .ok_or_else(|| CoreError::AssumptionViolated("balance equations are singular".into()))?;

    // Clip roundoff-scale negatives; anything larger is a real violation.
    for v in nu.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-12 {
                return Err(CoreError::AssumptionViolated(format!(
                    "stationary solve produced negative mass {v}"
                )));
            }
            *v = 0.0;
        }
    }
    let total: f64 = nu.iter().sum();
    nu /= total;

    let residual = (p.transpose() * &nu - &nu).abs().sum();
    if residual > STATIONARY_TOL {
        return Err(CoreError::AssumptionViolated(format!(
            "stationarity residual {residual:e} exceeds {STATIONARY_TOL:e}"
        )));
    }
    Ok(nu)
}

fn max_row_l1_to(p_t: &DMatrix<f64>, nu: &DVector<f64>) -> f64 {
    let n = p_t.nrows();
    let mut worst = 0.0f64;
    for s in 0..n {
        let mut acc = 0.0;
        for sp in 0..n {
            acc += (p_t[(s, sp)] - nu[sp]).abs();
        }
        worst = worst.max(acc);
    }
    worst
}

/// Smallest `t >= 1` with `max_s ||P^t(s,.) - nu||_1 <= 1/2`. The maximum over
/// initial distributions of the total-variation gap is attained at a vertex,
/// so scanning rows suffices.
pub fn mixing_time(p: &DMatrix<f64>, t_max: usize) -> Result<usize, CoreError> {
    let nu = stationary_distribution(p)?;
    let mut power = p.clone();
    for t in 1..=t_max {
        if max_row_l1_to(&power, &nu) <= 0.5 {
            return Ok(t);
        }
        power *= p;
    }
    Err(CoreError::AssumptionViolated(format!(
        "chain did not mix within t_max = {t_max} steps"
    )))
}

/// Verifies the geometric mixing bound
/// `||P^k - 1 nu^T||_inf <= (1/2)^{floor(k / t_mix)}` for `k >= t_mix`.
pub fn mixing_bound_check(p: &DMatrix<f64>, nu: &DVector<f64>, t_mix: usize, k: usize) -> bool {
    assert!(t_mix >= 1 && k >= 1);
    let n = p.nrows();
    let mut power = DMatrix::<f64>::identity(n, n);
    for _ in 0..k {
        power *= p;
    }
    let norm = max_row_l1_to(&power, nu);
    norm <= 0.5f64.powi((k / t_mix) as i32)
}

/// Stationary summary of the chain a policy induces: the distribution, the
/// (regularized) average cost, the mixing time and the ergodicity margin.
#[derive(Debug, Clone)]
pub struct StationaryInfo {
    pub nu: DVector<f64>,
    pub rho: f64,
    pub t_mix: usize,
    /// `Gamma` with `min_s nu(s) >= 1 - Gamma`.
    pub gamma_bound: f64,
}

pub fn stationary_info(
    mdp: &TabularAmdp,
    pi: &Policy,
    reg: &Regularizer,
) -> Result<StationaryInfo, CoreError> {
    let p = induced_state_kernel(mdp, pi)?;
    let nu = stationary_distribution(&p)?;
    let t_mix = mixing_time(&p, DEFAULT_T_MAX)?;
    let mut rho = 0.0;
    for s in 0..mdp.n_states {
        let mut c_pi = 0.0;
        for a in 0..mdp.n_actions {
            c_pi += pi.probs[s][a] * mdp.cost[s][a];
        }
        rho += nu[s] * (c_pi + reg.h_state(pi, s));
    }
    let nu_min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(StationaryInfo {
        nu,
        rho,
        t_mix,
        gamma_bound: 1.0 - nu_min,
    })
}

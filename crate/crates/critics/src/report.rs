//! Shift-invariant error measurements of critic outputs against the exact
//! differential Q-function.

use amdp_core::numeric::centered_sup_norm;

/// Aggregated error measures over independent critic replicas, all in the
/// shift-minimized sup norm.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    /// Bias of the replica mean: `min_b || mean(Qhat) + b 1 - Qbar ||_inf`.
    pub bias: f64,
    /// Mean squared shifted error across replicas.
    pub sigma_sq: f64,
    /// Mean squared shifted magnitude of the estimates themselves.
    pub kappa_sq: f64,
}

/// `q_replicas` holds one materialized Q-table per independent run. The bias
/// estimate averages the replicas first, so it is an estimate of the true
/// bias, not the bias itself.
pub fn critic_error_report(q_replicas: &[Vec<f64>], q_bar: &[f64]) -> ErrorReport {
    assert!(!q_replicas.is_empty());
    let n = q_bar.len();
    let mut mean = vec![0.0; n];
    let mut sigma_sq = 0.0;
    let mut kappa_sq = 0.0;
    for q in q_replicas {
        assert_eq!(q.len(), n);
        let diff: Vec<f64> = q.iter().zip(q_bar).map(|(a, b)| a - b).collect();
        sigma_sq += centered_sup_norm(&diff).0.powi(2);
        kappa_sq += centered_sup_norm(q).0.powi(2);
        for (m, v) in mean.iter_mut().zip(q) {
            *m += v;
        }
    }
    let r = q_replicas.len() as f64;
    mean.iter_mut().for_each(|v| *v /= r);
    let mean_diff: Vec<f64> = mean.iter().zip(q_bar).map(|(a, b)| a - b).collect();
    ErrorReport {
        bias: centered_sup_norm(&mean_diff).0,
        sigma_sq: sigma_sq / r,
        kappa_sq: kappa_sq / r,
    }
}

//! Low-dimensional policy representation under a shared feature map.
//!
//! When every critic step returns coefficients for one fixed `Psi`, the whole
//! policy sequence collapses to a `d`-dimensional recursion
//! `theta_tilde_{k+1} = (theta_tilde_k - lambda_k theta_k) / (1 + lambda_k omega)`
//! with `pi_{k+1}(.|s) proportional to exp((Psi theta_tilde_{k+1})(s,.))`.

use amdp_core::numeric::softmax_row;
use amdp_core::{pair_index, Policy};
use linear_fa::FeatureMap;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct LowDimPolicy {
    pub theta_tilde: DVector<f64>,
}

impl LowDimPolicy {
    /// Starts at zero coefficients, i.e. the uniform policy.
    pub fn new(dim: usize) -> Self {
        LowDimPolicy {
            theta_tilde: DVector::zeros(dim),
        }
    }

    /// Applies one actor step to the coefficient recursion.
    pub fn step(&self, theta_k: &DVector<f64>, lambda: f64, omega: f64) -> Self {
        LowDimPolicy {
            theta_tilde: (&self.theta_tilde - lambda * theta_k) / (1.0 + lambda * omega),
        }
    }

    /// Materializes the softmax policy the coefficients represent.
    pub fn to_policy(&self, features: &FeatureMap, n_states: usize, n_actions: usize) -> Policy {
        let logits_flat = features.apply(&self.theta_tilde);
        let mut probs = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let mut row: Vec<f64> = (0..n_actions)
                .map(|a| logits_flat[pair_index(s, a, n_actions)])
                .collect();
            softmax_row(&mut row);
            probs.push(row);
        }
        Policy { probs }
    }
}

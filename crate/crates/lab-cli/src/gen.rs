//! Random MDP instances: softmax-normalized kernels (strictly positive, hence
//! ergodic) with a sparse per-state constant cost.

use amdp_core::TabularAmdp;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn default_zero_cost_fraction() -> f64 {
    0.95
}
fn default_cost_range() -> (f64, f64) {
    (0.0, 10.0)
}
fn default_temperature() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// Fraction of states with identically zero cost.
    #[serde(default = "default_zero_cost_fraction")]
    pub zero_cost_fraction: f64,
    /// Costly states draw one constant, shared across actions, from this range.
    #[serde(default = "default_cost_range")]
    pub cost_range: (f64, f64),
    /// Softmax temperature for kernel normalization; larger is closer to
    /// uniform.
    #[serde(default = "default_temperature")]
    pub softmax_temperature: f64,
    pub seed: u64,
}

impl RandomMdpSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_states < 2 || self.n_actions < 1 {
            return Err("need n_states >= 2 and n_actions >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.zero_cost_fraction) {
            return Err("zero_cost_fraction must lie in [0, 1]".into());
        }
        if self.cost_range.0 > self.cost_range.1 {
            return Err("cost_range must be ordered".into());
        }
        if self.softmax_temperature <= 0.0 {
            return Err("softmax_temperature must be positive".into());
        }
        Ok(())
    }
}

/// Kernel rows are softmax-normalized i.i.d. uniforms (entrywise positive, so
/// every policy induces an irreducible aperiodic chain); a seeded choice of
/// `floor(zero_cost_fraction * n)` states gets zero cost and the rest share a
/// uniform per-state constant across actions.
pub fn generate_random_mdp(spec: &RandomMdpSpec) -> TabularAmdp {
    spec.validate().expect("valid instance spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, m) = (spec.n_states, spec.n_actions);
    let kernel: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let mut row: Vec<f64> = (0..n)
                        .map(|_| (rng.gen::<f64>() / spec.softmax_temperature).exp())
                        .collect();
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                    row
                })
                .collect()
        })
        .collect();

    let n_zero = (spec.zero_cost_fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut cost = vec![vec![0.0; m]; n];
    let mut bound = 0.0f64;
    for &s in order.iter().skip(n_zero) {
        let c = rng.gen_range(spec.cost_range.0..spec.cost_range.1);
        cost[s] = vec![c; m];
        bound = bound.max(c.abs());
    }
    TabularAmdp::new(kernel, cost, bound).expect("generated instance is valid")
}

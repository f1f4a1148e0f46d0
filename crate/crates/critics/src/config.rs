//! Critic configurations and the theory-side parameter schedules.

use serde::{Deserialize, Serialize};

/// Multiple-trajectory method parameters: `t`/`m` size the average-cost
/// estimate, `t_prime`/`m_prime` the differential-Q estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiTrajConfig {
    /// Horizon of each average-cost trajectory (length `t + 1` in pairs).
    pub t: usize,
    /// Horizon of each Q trajectory (length `t_prime + 1` in pairs).
    pub t_prime: usize,
    /// Number of average-cost trajectories.
    pub m: usize,
    /// Number of Q trajectories per state-action pair.
    pub m_prime: usize,
}

impl MultiTrajConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.t < 1 || self.t_prime < 1 || self.m < 1 || self.m_prime < 1 {
            return Err("all multiple-trajectory parameters must be >= 1".into());
        }
        Ok(())
    }

    /// Non-fatal warnings: horizons at or below `t_mix + 1` leave the bias
    /// bounds of the method without force.
    pub fn warnings(&self, t_mix: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.t <= t_mix + 1 {
            out.push(format!("t = {} <= t_mix + 1 = {}", self.t, t_mix + 1));
        }
        if self.t_prime <= t_mix + 1 {
            out.push(format!(
                "t_prime = {} <= t_mix + 1 = {}",
                self.t_prime,
                t_mix + 1
            ));
        }
        out
    }

    /// Exact number of kernel queries a run consumes.
    pub fn expected_samples(&self, n_pairs: usize) -> u64 {
        (self.m * self.t + self.m_prime * n_pairs * self.t_prime) as u64
    }
}

/// Variance-reduced TD parameters. Batch schedules are per epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VrtdConfig {
    /// Inner-loop step size.
    pub eta: f64,
    /// Inner-loop length per epoch.
    pub t_inner: usize,
    /// Anchor batch sizes, one per epoch.
    pub n_k: Vec<usize>,
    /// Average-cost batch sizes, one per epoch.
    pub n_prime_k: Vec<usize>,
    pub k_epochs: usize,
    /// Skip length for inner-loop samples.
    pub tau: usize,
    /// Skip length for anchor and average-cost samples.
    pub tau_prime: usize,
    /// Exploration floor for the exploratory variant.
    pub underline_pi: Option<f64>,
}

impl VrtdConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.eta <= 0.0 {
            return Err("eta must be positive".into());
        }
        if self.t_inner < 1 || self.k_epochs < 1 {
            return Err("t_inner and k_epochs must be >= 1".into());
        }
        if self.n_k.len() != self.k_epochs || self.n_prime_k.len() != self.k_epochs {
            return Err(format!(
                "batch schedules must have length k_epochs = {}",
                self.k_epochs
            ));
        }
        if self.n_k.iter().any(|&n| n < 1) || self.n_prime_k.iter().any(|&n| n < 1) {
            return Err("batch sizes must be >= 1".into());
        }
        Ok(())
    }

    /// Exact transition count a run consumes: per epoch, `tau_prime` per
    /// average-cost observation, `tau_prime + 1` per anchor transition sample,
    /// and `tau + 1` per inner-loop sample.
    pub fn expected_samples(&self) -> u64 {
        let mut total = 0u64;
        for k in 0..self.k_epochs {
            total += (self.tau_prime * self.n_prime_k[k]) as u64;
            total += ((self.tau_prime + 1) * self.n_k[k]) as u64;
            total += ((self.tau + 1) * self.t_inner) as u64;
        }
        total
    }
}

/// Geometric-batch schedule: step size `(1-beta)/845`, inner length
/// `64 / (mu (1-beta) eta)`, anchor batches floored at `1160 / (mu (1-beta)^2)`
/// and ramping as `(3/4)^{K-k}` toward the final-epoch sizes, with skip
/// lengths set from the mixing time since the chain's geometric constants are
/// not observable.
pub fn vrtd_default_schedule(
    one_minus_beta: f64,
    mu: f64,
    t_mix: usize,
    k_epochs: usize,
    n_final: usize,
    n_prime_final: usize,
) -> VrtdConfig {
    assert!(one_minus_beta > 0.0 && mu > 0.0 && k_epochs >= 1);
    let eta = one_minus_beta / 845.0;
    let t_inner = (64.0 / (mu * one_minus_beta * eta)).ceil() as usize;
    let n_floor = (1160.0 / (mu * one_minus_beta * one_minus_beta)).ceil() as usize;
    let mut n_k = Vec::with_capacity(k_epochs);
    let mut n_prime_k = Vec::with_capacity(k_epochs);
    for k in 1..=k_epochs {
        let ramp = 0.75f64.powi((k_epochs - k) as i32);
        n_k.push(n_floor.max((ramp * n_final as f64).ceil() as usize));
        n_prime_k.push(((ramp * n_prime_final as f64).ceil() as usize).max(1));
    }
    let tau = 3 * t_mix;
    VrtdConfig {
        eta,
        t_inner,
        n_k,
        n_prime_k,
        k_epochs,
        tau,
        tau_prime: tau,
        underline_pi: None,
    }
}

/// Constant-batch schedule for bias-mode runs: every epoch uses the same
/// `n >= 1160 / (mu (1-beta)^2)` and `n' >= 1 / (mu (1-beta)^2)`.
pub fn vrtd_fixed_schedule(
    one_minus_beta: f64,
    mu: f64,
    t_mix: usize,
    k_epochs: usize,
    n: usize,
    n_prime: usize,
) -> VrtdConfig {
    let mut cfg = vrtd_default_schedule(one_minus_beta, mu, t_mix, k_epochs, n, n_prime);
    let n_floor = (1160.0 / (mu * one_minus_beta * one_minus_beta)).ceil() as usize;
    let n_prime_floor = (1.0 / (mu * one_minus_beta * one_minus_beta)).ceil() as usize;
    cfg.n_k = vec![n.max(n_floor); k_epochs];
    cfg.n_prime_k = vec![n_prime.max(n_prime_floor); k_epochs];
    cfg
}

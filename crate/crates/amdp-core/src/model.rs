//! The tabular model and policy types, with validating constructors and the
//! JSON model-file loader.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Tolerance for rows that must sum to one (kernel rows, policy rows).
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Flat index of the state-action pair `(s, a)`.
#[inline]
pub fn pair_index(s: usize, a: usize, n_actions: usize) -> usize {
    s * n_actions + a
}

/// A finite average-cost MDP given by its transition tensor and cost table.
///
/// `kernel[s][a][s']` is the probability of moving to `s'` when action `a`
/// is taken in state `s`; `cost[s][a]` is the per-step cost. The model is the
/// ground truth known to oracles and hidden behind the samplers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularAmdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub kernel: Vec<Vec<Vec<f64>>>,
    pub cost: Vec<Vec<f64>>,
    /// Upper bound on `|cost|`, used by the theory-side bounds.
    pub cost_bound: f64,
}

impl TabularAmdp {
    pub fn new(
        kernel: Vec<Vec<Vec<f64>>>,
        cost: Vec<Vec<f64>>,
        cost_bound: f64,
    ) -> Result<Self, CoreError> {
        let n_states = kernel.len();
        let n_actions = kernel.first().map_or(0, |row| row.len());
        let model = TabularAmdp {
            n_states,
            n_actions,
            kernel,
            cost,
            cost_bound,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks every structural invariant, reporting the first violated row.
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_states < 2 {
            return Err(CoreError::InvalidModel("n_states must be >= 2".into()));
        }
        if self.n_actions < 1 {
            return Err(CoreError::InvalidModel("n_actions must be >= 1".into()));
        }
        if self.kernel.len() != self.n_states || self.cost.len() != self.n_states {
            return Err(CoreError::InvalidModel(
                "kernel/cost outer dimension != n_states".into(),
            ));
        }
        for (s, per_action) in self.kernel.iter().enumerate() {
            if per_action.len() != self.n_actions {
                return Err(CoreError::InvalidModel(format!(
                    "kernel[{s}] has {} action rows, expected {}",
                    per_action.len(),
                    self.n_actions
                )));
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != self.n_states {
                    return Err(CoreError::InvalidModel(format!(
                        "kernel[{s}][{a}] has length {}, expected {}",
                        row.len(),
                        self.n_states
                    )));
                }
                let mut sum = 0.0;
                for (sp, &p) in row.iter().enumerate() {
                    if !(p >= 0.0) {
                        return Err(CoreError::InvalidModel(format!(
                            "kernel[{s}][{a}][{sp}] = {p} is negative or NaN"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > SIMPLEX_TOL {
                    return Err(CoreError::InvalidModel(format!(
                        "kernel[{s}][{a}] sums to {sum}, expected 1 within {SIMPLEX_TOL:e}"
                    )));
                }
            }
        }
        for (s, row) in self.cost.iter().enumerate() {
            if row.len() != self.n_actions {
                return Err(CoreError::InvalidModel(format!(
                    "cost[{s}] has length {}, expected {}",
                    row.len(),
                    self.n_actions
                )));
            }
            for (a, &c) in row.iter().enumerate() {
                if !c.is_finite() || c.abs() > self.cost_bound {
                    return Err(CoreError::InvalidModel(format!(
                        "cost[{s}][{a}] = {c} exceeds cost_bound {}",
                        self.cost_bound
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n_pairs(&self) -> usize {
        self.n_states * self.n_actions
    }

    #[inline]
    pub fn kernel_row(&self, s: usize, a: usize) -> &[f64] {
        &self.kernel[s][a]
    }

    /// Cost table flattened in pair order.
    pub fn cost_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_pairs());
        for row in &self.cost {
            out.extend_from_slice(row);
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self, CoreError> {
        let model: TabularAmdp = serde_json::from_str(text)
            .map_err(|e| CoreError::InvalidModel(format!("model JSON parse error: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }
}

/// A randomized stationary policy: one action distribution per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    /// `probs[s][a]` = probability of action `a` in state `s`.
    pub probs: Vec<Vec<f64>>,
}

impl Policy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        let policy = Policy { probs };
        policy.validate()?;
        Ok(policy)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy {
            probs: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    /// Point-mass policy picking `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        let probs = actions
            .iter()
            .map(|&a| {
                let mut row = vec![0.0; n_actions];
                row[a] = 1.0;
                row
            })
            .collect();
        Policy { probs }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.probs.is_empty() {
            return Err(CoreError::InvalidModel("policy has no states".into()));
        }
        let n_actions = self.probs[0].len();
        for (s, row) in self.probs.iter().enumerate() {
            if row.len() != n_actions {
                return Err(CoreError::InvalidModel(format!(
                    "policy row {s} has length {}, expected {n_actions}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for (a, &p) in row.iter().enumerate() {
                if !(p >= 0.0) {
                    return Err(CoreError::InvalidModel(format!(
                        "policy[{s}][{a}] = {p} is negative or NaN"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(CoreError::InvalidModel(format!(
                    "policy row {s} sums to {sum}, expected 1 within {SIMPLEX_TOL:e}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn n_actions(&self) -> usize {
        self.probs[0].len()
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    /// Checks that this policy is defined on the same spaces as `mdp`.
    pub fn check_shape(&self, mdp: &TabularAmdp) -> Result<(), CoreError> {
        if self.n_states() != mdp.n_states || self.n_actions() != mdp.n_actions {
            return Err(CoreError::DimensionMismatch(format!(
                "policy is {}x{}, model is {}x{}",
                self.n_states(),
                self.n_actions(),
                mdp.n_states,
                mdp.n_actions
            )));
        }
        Ok(())
    }
}

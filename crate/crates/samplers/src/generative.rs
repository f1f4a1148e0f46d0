//! The generative ("i.i.d.") observation model: query any state-action pair
//! for a next state and the instantaneous cost.

use amdp_core::TabularAmdp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rng::sample_categorical;

pub struct GenerativeOracle<'m> {
    model: &'m TabularAmdp,
    rng: ChaCha8Rng,
    queries: u64,
}

impl<'m> GenerativeOracle<'m> {
    pub fn new(model: &'m TabularAmdp, seed: u64) -> Self {
        GenerativeOracle {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            queries: 0,
        }
    }

    /// Draws `s' ~ P(.|s,a)` and returns it with `c(s,a)`.
    pub fn query(&mut self, s: usize, a: usize) -> (usize, f64) {
        assert!(
            s < self.model.n_states && a < self.model.n_actions,
            "state-action index ({s},{a}) out of range"
        );
        self.queries += 1;
        let next = sample_categorical(&mut self.rng, self.model.kernel_row(s, a));
        (next, self.model.cost[s][a])
    }

    /// Number of kernel queries made so far; the sample-complexity meter.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn model(&self) -> &TabularAmdp {
        self.model
    }
}

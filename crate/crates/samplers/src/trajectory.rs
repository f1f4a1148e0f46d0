//! The Markovian observation model: one live trajectory per simulator, with
//! skip-based sample collection and an exact transition meter.

use amdp_core::{Policy, TabularAmdp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rng::sample_categorical;

/// One transition tuple `xi = ((s,a), (s',a'), c(s,a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSample {
    pub s: usize,
    pub a: usize,
    pub s_next: usize,
    pub a_next: usize,
    /// Model cost `c(s,a)`; regularizer terms are the consumer's business.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum InitState {
    UniformRandom,
    Fixed(usize),
}

/// A single unbroken Markov trajectory under a behavior policy.
///
/// The simulator owns its random stream and tracks the current state-action
/// pair; every kernel draw bumps the transition meter. It is single-owner by
/// design: concurrent runs each build their own simulator.
pub struct TrajectorySimulator<'m> {
    model: &'m TabularAmdp,
    policy: Policy,
    state: usize,
    action: usize,
    rng: ChaCha8Rng,
    transitions: u64,
}

impl<'m> TrajectorySimulator<'m> {
    pub fn new(model: &'m TabularAmdp, policy: Policy, seed: u64, init: InitState) -> Self {
        policy.check_shape(model).expect("policy/model shape");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = match init {
            InitState::UniformRandom => rng.gen_range(0..model.n_states),
            InitState::Fixed(s) => {
                assert!(s < model.n_states, "initial state out of range");
                s
            }
        };
        let action = sample_categorical(&mut rng, policy.row(state));
        TrajectorySimulator {
            model,
            policy,
            state,
            action,
            rng,
            transitions: 0,
        }
    }

    /// Kernel draws consumed so far.
    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn current_pair(&self) -> (usize, usize) {
        (self.state, self.action)
    }

    /// Advances the chain one transition and returns the tuple.
    pub fn step(&mut self) -> TransitionSample {
        let (s, a) = (self.state, self.action);
        let cost = self.model.cost[s][a];
        self.transitions += 1;
        let s_next = sample_categorical(&mut self.rng, self.model.kernel_row(s, a));
        let a_next = sample_categorical(&mut self.rng, self.policy.row(s_next));
        self.state = s_next;
        self.action = a_next;
        TransitionSample {
            s,
            a,
            s_next,
            a_next,
            cost,
        }
    }

    /// Records `length` successive `(s, a, c)` triples, consuming one model
    /// transition per triple.
    pub fn rollout(&mut self, length: usize) -> Vec<(usize, usize, f64)> {
        assert!(length >= 1);
        let mut out = Vec::with_capacity(length);
        for _ in 0..length {
            let (s, a) = (self.state, self.action);
            out.push((s, a, self.model.cost[s][a]));
            self.step();
        }
        out
    }

    /// Advances `tau` steps, then records the next transition: the returned
    /// tuple is the last of `tau + 1` successive transitions and the chain
    /// continues from its `(s', a')`.
    pub fn skip_and_sample(&mut self, tau: usize) -> TransitionSample {
        for _ in 0..tau {
            self.step();
        }
        self.step()
    }

    /// Advances `tau` steps and reads the current pair without consuming an
    /// extra transition: the last of `tau + 1` successive state-action pairs.
    pub fn skip_and_observe(&mut self, tau: usize) -> (usize, usize, f64) {
        for _ in 0..tau {
            self.step();
        }
        (
            self.state,
            self.action,
            self.model.cost[self.state][self.action],
        )
    }

    /// Runs the on-policy chain for `tau` steps, then interleaves one
    /// transition whose leading action comes from `pi_tilde`: draws
    /// `a ~ pi_tilde(.|s)`, `s' ~ P(.|s,a)`, `a' ~ pi(.|s')` and resumes the
    /// live trajectory from `(s', a')`.
    pub fn perturbed_skip_and_sample(
        &mut self,
        tau: usize,
        pi_tilde: &Policy,
    ) -> TransitionSample {
        for _ in 0..tau {
            self.step();
        }
        let s = self.state;
        let a = sample_categorical(&mut self.rng, pi_tilde.row(s));
        let cost = self.model.cost[s][a];
        self.transitions += 1;
        let s_next = sample_categorical(&mut self.rng, self.model.kernel_row(s, a));
        let a_next = sample_categorical(&mut self.rng, self.policy.row(s_next));
        self.state = s_next;
        self.action = a_next;
        TransitionSample {
            s,
            a,
            s_next,
            a_next,
            cost,
        }
    }
}

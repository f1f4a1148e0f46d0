//! The multiple-trajectory evaluator for the generative model, plus an
//! exact-expectation twin that propagates distributions through matrix powers
//! instead of sampling.

use amdp_core::{
    induced_state_action_kernel, induced_state_kernel, pair_index, Policy, Regularizer,
    TabularAmdp,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use samplers::{derive_seed, sample_categorical, GenerativeOracle};

use crate::config::MultiTrajConfig;
use crate::output::{CriticOutput, QEstimate};

/// Runs the multiple-trajectory method.
///
/// `m` independent trajectories of horizon `t` estimate the average cost from
/// their terminal costs alone; `m_prime` trajectories of horizon `t_prime`
/// from every state-action pair estimate the differential Q-function from
/// centered partial sums. The two phases draw from disjoint randomness.
/// `h_state` carries the per-state regularizer values folded into the cost.
pub fn multiple_trajectory_evaluate(
    oracle: &mut GenerativeOracle,
    pi: &Policy,
    h_state: &[f64],
    cfg: &MultiTrajConfig,
    action_seed: u64,
) -> CriticOutput {
    cfg.validate().expect("valid multiple-trajectory config");
    let model = oracle.model();
    let (n, m_actions) = (model.n_states, model.n_actions);
    let cost = |model: &TabularAmdp, s: usize, a: usize| model.cost[s][a] + h_state[s];
    let start_queries = oracle.queries();

    let mut rho_rng = ChaCha8Rng::seed_from_u64(derive_seed(action_seed, "rho-phase", 0));
    let mut rho_hat = 0.0;
    for _ in 0..cfg.m {
        let mut s = rho_rng.gen_range(0..n);
        let mut a = sample_categorical(&mut rho_rng, pi.row(s));
        for _ in 0..cfg.t {
            let (s_next, _) = oracle.query(s, a);
            s = s_next;
            a = sample_categorical(&mut rho_rng, pi.row(s));
        }
        rho_hat += cost(oracle.model(), s, a);
    }
    rho_hat /= cfg.m as f64;

    let mut q_rng = ChaCha8Rng::seed_from_u64(derive_seed(action_seed, "q-phase", 0));
    let mut q_table = vec![0.0; n * m_actions];
    for _ in 0..cfg.m_prime {
        for s0 in 0..n {
            for a0 in 0..m_actions {
                let mut acc = cost(oracle.model(), s0, a0) - rho_hat;
                let (mut s, mut a) = (s0, a0);
                for _ in 0..cfg.t_prime {
                    let (s_next, _) = oracle.query(s, a);
                    s = s_next;
                    a = sample_categorical(&mut q_rng, pi.row(s));
                    acc += cost(oracle.model(), s, a) - rho_hat;
                }
                q_table[pair_index(s0, a0, m_actions)] += acc;
            }
        }
    }
    for v in q_table.iter_mut() {
        *v /= cfg.m_prime as f64;
    }

    CriticOutput {
        rho_hat,
        q: QEstimate::Table(q_table),
        samples_used: oracle.queries() - start_queries,
        epochs: Vec::new(),
        perturbation_active: false,
    }
}

/// Exact expectations of the estimators above, by propagating the start
/// distribution through matrix powers: `E[rho_hat]` is the horizon-`t`
/// expected cost and `E[Qhat]` the centered partial sums under the pair chain.
pub fn multiple_trajectory_expectation(
    mdp: &TabularAmdp,
    pi: &Policy,
    reg: &Regularizer,
    cfg: &MultiTrajConfig,
    start: &[f64],
) -> (f64, Vec<f64>) {
    let (n, m) = (mdp.n_states, mdp.n_actions);
    assert_eq!(start.len(), n, "start distribution over states");
    let h = reg.h_table(pi);
    let p_state = induced_state_kernel(mdp, pi).expect("shapes agree");
    // expected effective cost per state under pi
    let c_pi: DVector<f64> = DVector::from_fn(n, |s, _| {
        (0..m).map(|a| pi.probs[s][a] * mdp.cost[s][a]).sum::<f64>() + h[s]
    });
    let mut dist = DVector::from_column_slice(start);
    for _ in 0..cfg.t {
        dist = p_state.transpose() * dist;
    }
    let e_rho = dist.dot(&c_pi);

    let p_pair = induced_state_action_kernel(mdp, pi).expect("shapes agree");
    let mut c_pair = DVector::zeros(n * m);
    for s in 0..n {
        for a in 0..m {
            c_pair[pair_index(s, a, m)] = mdp.cost[s][a] + h[s];
        }
    }
    let mut partial = c_pair.clone();
    let mut term = c_pair.clone();
    for _ in 0..cfg.t_prime {
        term = &p_pair * term;
        partial += &term;
    }
    let e_q: Vec<f64> = partial
        .iter()
        .map(|v| v - (cfg.t_prime + 1) as f64 * e_rho)
        .collect();
    (e_rho, e_q)
}

//! End-to-end actor checks against the exact solver: convergence under both
//! schedules, the one-step regularized recursion, shift invariance of the
//! updates, and determinism of full runs.

use amdp_core::*;
use critics::VrtdConfig;
use linear_fa::build_random_features;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spmd_actor::*;

fn random_mdp(rng: &mut ChaCha8Rng, n: usize, m: usize, temp: f64) -> TabularAmdp {
    let kernel: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let mut row: Vec<f64> =
                        (0..n).map(|_| (rng.gen::<f64>() / temp).exp()).collect();
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                    row
                })
                .collect()
        })
        .collect();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    TabularAmdp::new(kernel, cost, 1.0).unwrap()
}

#[test]
fn exact_critic_reaches_optimum_on_dominant_instance() {
    // one action strictly dominates in every state
    let n = 5;
    let kernel: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|s| {
            let mut row = vec![0.1; n];
            row[s] += 1.0 - 0.1 * n as f64;
            vec![row.clone(), row]
        })
        .collect();
    let cost: Vec<Vec<f64>> = (0..n).map(|s| vec![0.8 + 0.01 * s as f64, 0.1]).collect();
    let mdp = TabularAmdp::new(kernel, cost, 1.0).unwrap();
    let reg = Regularizer::none();
    let sol = solve_optimal(&mdp, &reg, 1e-10).unwrap();

    let cfg = SpmdConfig {
        k_iters: 500,
        schedule: ScheduleChoice::ConstantThm3 { kappa: None },
        critic: CriticChoice::ExactOracle,
        output_rule: OutputRule::LastIterate,
        seed: 1,
        record_distance: false,
        low_dim: false,
        keep_iterates: false,
    };
    let trace = spmd_run(&mdp, &reg, &cfg).unwrap();
    let rho_final = average_cost(&mdp, &trace.last_policy, &reg).unwrap();
    assert!(
        rho_final - sol.rho <= 1e-6,
        "gap {} too large",
        rho_final - sol.rho
    );
    assert_eq!(trace.records.len(), 500);
    assert_eq!(trace.total_samples, 0);
}

#[test]
fn regularized_run_contracts_and_satisfies_one_step_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mdp = random_mdp(&mut rng, 6, 2, 4.0);
    let omega = 0.1;
    let reg = Regularizer::entropy(omega);
    let sol = solve_optimal(&mdp, &reg, 1e-12).unwrap();
    let p_star = induced_state_kernel(&mdp, &sol.policy).unwrap();
    let nu_star = stationary_distribution(&p_star).unwrap();
    let gamma = estimate_gamma(&mdp, 64, 4096, 3).unwrap();

    let k_iters = 150;
    let cfg = SpmdConfig {
        k_iters,
        schedule: ScheduleChoice::RegularizedThm4 {
            gamma: Some(gamma),
            q: None,
        },
        critic: CriticChoice::ExactOracle,
        output_rule: OutputRule::LastIterate,
        seed: 2,
        record_distance: true,
        low_dim: false,
        keep_iterates: true,
    };
    let trace = spmd_run(&mdp, &reg, &cfg).unwrap();
    let lambda = trace.lambdas[0];
    assert!((lambda - (1.0 - gamma) / (omega * gamma)).abs() < 1e-12);

    // distance to the optimum decays to near zero
    let d_first = trace.records[0].dist_to_opt.unwrap();
    let d_last = expected_kl(&nu_star, &sol.policy, &trace.last_policy);
    assert!(d_last < 1e-6, "final distance {d_last}");
    assert!(d_first > d_last);

    // one-step recursion with zero critic error:
    // (1/(1-G))(rho_{k+1} - rho*) + (1/l + w) D_{k+1}
    //   <= (G/(1-G))(rho_k - rho*) + (1/l) D_k
    assert_eq!(trace.iterates.len(), k_iters + 1);
    let distances: Vec<f64> = trace
        .iterates
        .iter()
        .map(|p| expected_kl(&nu_star, &sol.policy, p))
        .collect();
    let rhos: Vec<f64> = trace
        .iterates
        .iter()
        .map(|p| average_cost(&mdp, p, &reg).unwrap())
        .collect();
    for k in 0..k_iters {
        // the recursion needs the iterate's own stationary floor to be
        // covered by the schedule Gamma
        let p_next = induced_state_kernel(&mdp, &trace.iterates[k + 1]).unwrap();
        let nu_next = stationary_distribution(&p_next).unwrap();
        let floor = nu_next.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(floor >= 1.0 - gamma - 1e-9, "probe Gamma undershot");
        let lhs = (rhos[k + 1] - sol.rho) / (1.0 - gamma)
            + (1.0 / lambda + omega) * distances[k + 1];
        let rhs = gamma / (1.0 - gamma) * (rhos[k] - sol.rho) + distances[k] / lambda;
        assert!(lhs <= rhs + 1e-9, "recursion failed at step {k}: {lhs} > {rhs}");
    }

    // contraction of the distance at rate <= Gamma per step, once away from
    // the noise floor of the solver tolerance
    for k in 0..k_iters {
        if distances[k] > 1e-9 {
            assert!(distances[k + 1] <= gamma * distances[k] + 1e-10);
        }
    }
}

#[test]
fn zero_cost_keeps_stochastic_actor_at_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mdp = random_mdp(&mut rng, 4, 2, 1.0);
    for row in mdp.cost.iter_mut() {
        row.iter_mut().for_each(|c| *c = 0.0);
    }
    let features = build_random_features(mdp.n_pairs(), 3, 5).unwrap();
    let cfg = SpmdConfig {
        k_iters: 5,
        schedule: ScheduleChoice::User(vec![0.5]),
        critic: CriticChoice::Vrtd {
            features,
            cfg: VrtdConfig {
                eta: 0.1,
                t_inner: 200,
                n_k: vec![100; 5],
                n_prime_k: vec![50; 5],
                k_epochs: 5,
                tau: 2,
                tau_prime: 2,
                underline_pi: None,
            },
        },
        output_rule: OutputRule::UniformRandomIterate,
        seed: 4,
        record_distance: false,
        low_dim: false,
        keep_iterates: false,
    };
    let trace = spmd_run(&mdp, &Regularizer::none(), &cfg).unwrap();
    for s in 0..4 {
        for a in 0..2 {
            assert_eq!(trace.last_policy.probs[s][a], 0.5);
        }
    }
    assert!(trace.total_samples > 0);
}

#[test]
fn per_state_constant_q_shifts_do_not_change_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mdp = random_mdp(&mut rng, 4, 3, 1.0);
    let reg = Regularizer::entropy(0.2);
    let dv = differential_values(&mdp, &Policy::uniform(4, 3), &reg).unwrap();
    let q = dv.q_bar.as_slice().to_vec();
    let mut q_shifted = q.clone();
    for s in 0..4 {
        for a in 0..3 {
            q_shifted[s * 3 + a] += 3.7 * (s as f64 + 1.0);
        }
    }
    let pi = Policy::uniform(4, 3);
    let a = kl_prox_update(&pi, &q, 0.6, &reg).unwrap();
    let b = kl_prox_update(&pi, &q_shifted, 0.6, &reg).unwrap();
    for s in 0..4 {
        for aa in 0..3 {
            assert!((a.probs[s][aa] - b.probs[s][aa]).abs() < 1e-12);
        }
    }
}

#[test]
fn vi_residuals_are_nonnegative_against_solved_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let mdp = random_mdp(&mut rng, 5, 2, 1.0);
        for reg in [Regularizer::none(), Regularizer::entropy(0.15)] {
            let sol = solve_optimal(&mdp, &reg, 1e-11).unwrap();
            let p_star = induced_state_kernel(&mdp, &sol.policy).unwrap();
            let nu_star = stationary_distribution(&p_star).unwrap();
            assert!(
                vi_residual(&mdp, &reg, &sol.policy, &sol.policy, &nu_star)
                    .unwrap()
                    .abs()
                    < 1e-12
            );
            for _ in 0..5 {
                let probs: Vec<Vec<f64>> = (0..5)
                    .map(|_| {
                        let mut row: Vec<f64> = (0..2).map(|_| rng.gen::<f64>() + 0.05).collect();
                        let s: f64 = row.iter().sum();
                        row.iter_mut().for_each(|v| *v /= s);
                        row
                    })
                    .collect();
                let pi = Policy::new(probs).unwrap();
                let vi = vi_residual(&mdp, &reg, &pi, &sol.policy, &nu_star).unwrap();
                assert!(vi >= -1e-8, "vi residual {vi}");
                let mono = monotonicity_residual(&mdp, &reg, &pi, &sol.policy, &nu_star).unwrap();
                assert!(mono >= -1e-8, "monotonicity residual {mono}");
            }
        }
    }
}

#[test]
fn runs_are_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mdp = random_mdp(&mut rng, 4, 2, 1.0);
    let features = build_random_features(mdp.n_pairs(), 3, 9).unwrap();
    let make_cfg = |seed| SpmdConfig {
        k_iters: 6,
        schedule: ScheduleChoice::User(vec![0.4]),
        critic: CriticChoice::Vrtd {
            features: features.clone(),
            cfg: VrtdConfig {
                eta: 0.1,
                t_inner: 300,
                n_k: vec![150; 3],
                n_prime_k: vec![80; 3],
                k_epochs: 3,
                tau: 2,
                tau_prime: 2,
                underline_pi: None,
            },
        },
        output_rule: OutputRule::UniformRandomIterate,
        seed,
        record_distance: false,
        low_dim: false,
        keep_iterates: false,
    };
    let a = spmd_run(&mdp, &Regularizer::none(), &make_cfg(42)).unwrap();
    let b = spmd_run(&mdp, &Regularizer::none(), &make_cfg(42)).unwrap();
    let c = spmd_run(&mdp, &Regularizer::none(), &make_cfg(43)).unwrap();
    assert_eq!(a.output_index, b.output_index);
    assert_eq!(a.total_samples, b.total_samples);
    for s in 0..4 {
        for aa in 0..2 {
            assert_eq!(
                a.last_policy.probs[s][aa].to_bits(),
                b.last_policy.probs[s][aa].to_bits()
            );
        }
    }
    assert!(a.last_policy != c.last_policy || a.output_index != c.output_index);
}

#[test]
fn low_dim_and_explicit_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mdp = random_mdp(&mut rng, 4, 2, 1.5);
    let features = build_random_features(mdp.n_pairs(), 3, 10).unwrap();
    let vrtd = VrtdConfig {
        eta: 0.1,
        t_inner: 400,
        n_k: vec![200; 2],
        n_prime_k: vec![100; 2],
        k_epochs: 2,
        tau: 2,
        tau_prime: 2,
        underline_pi: None,
    };
    let make_cfg = |low_dim| SpmdConfig {
        k_iters: 4,
        schedule: ScheduleChoice::User(vec![0.5]),
        critic: CriticChoice::Vrtd {
            features: features.clone(),
            cfg: vrtd.clone(),
        },
        output_rule: OutputRule::LastIterate,
        seed: 77,
        record_distance: false,
        low_dim,
        keep_iterates: false,
    };
    let reg = Regularizer::entropy(0.1);
    let compact = spmd_run(&mdp, &reg, &make_cfg(true)).unwrap();
    let explicit = spmd_run(&mdp, &reg, &make_cfg(false)).unwrap();
    assert!(compact.theta_tilde.is_some());
    for s in 0..4 {
        for a in 0..2 {
            assert!(
                (compact.last_policy.probs[s][a] - explicit.last_policy.probs[s][a]).abs() < 1e-9,
                "paths diverged at ({s},{a})"
            );
        }
    }
}

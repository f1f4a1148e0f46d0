//! Independent-oracle checks for the exact tabular layer: brute-force
//! summation, power iteration, truncated series, finite differences,
//! exhaustive enumeration, and a long-horizon rollout.

use amdp_core::*;
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_mdp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> TabularAmdp {
    let kernel: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let mut row: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                    row
                })
                .collect()
        })
        .collect();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    TabularAmdp::new(kernel, cost, 1.0).unwrap()
}

fn random_policy(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Policy {
    let probs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.05).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
            row
        })
        .collect();
    Policy::new(probs).unwrap()
}

#[test]
fn state_kernel_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mdp = random_mdp(&mut rng, 5, 3);
    let pi = random_policy(&mut rng, 5, 3);
    let p = induced_state_kernel(&mdp, &pi).unwrap();
    for s in 0..5 {
        for sp in 0..5 {
            let mut direct = 0.0;
            for a in 0..3 {
                direct += pi.probs[s][a] * mdp.kernel[s][a][sp];
            }
            assert!((p[(s, sp)] - direct).abs() < 1e-15);
        }
        let row_sum: f64 = (0..5).map(|sp| p[(s, sp)]).sum();
        assert!((row_sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn state_kernel_degenerate_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mdp = random_mdp(&mut rng, 4, 2);
    // deterministic policy rows copy the chosen action's kernel row
    let pi = Policy::deterministic(&[1, 0, 1, 0], 2);
    let p = induced_state_kernel(&mdp, &pi).unwrap();
    for s in 0..4 {
        let a = if s % 2 == 0 { 1 } else { 0 };
        for sp in 0..4 {
            assert_eq!(p[(s, sp)], mdp.kernel[s][a][sp]);
        }
    }
    // two actions with opposite deterministic rows mixed uniformly
    let kernel = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2];
    let mdp = TabularAmdp::new(kernel, vec![vec![0.0; 2]; 2], 1.0).unwrap();
    let p = induced_state_kernel(&mdp, &Policy::uniform(2, 2)).unwrap();
    assert_eq!(p[(0, 0)], 0.5);
    assert_eq!(p[(0, 1)], 0.5);
}

#[test]
fn pair_kernel_matches_brute_force_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mdp = random_mdp(&mut rng, 4, 3);
    let pi = random_policy(&mut rng, 4, 3);
    let p = induced_state_action_kernel(&mdp, &pi).unwrap();
    for s in 0..4 {
        for a in 0..3 {
            let i = pair_index(s, a, 3);
            let mut row_sum = 0.0;
            for sp in 0..4 {
                for ap in 0..3 {
                    let expect = mdp.kernel[s][a][sp] * pi.probs[sp][ap];
                    let got = p[(i, pair_index(sp, ap, 3))];
                    assert!((got - expect).abs() < 1e-15);
                    row_sum += got;
                }
            }
            assert!((row_sum - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn pair_kernel_single_state_reduces_to_policy() {
    // |S| = 1 is below the model minimum, so emulate it with two identical
    // states: every pair row must equal the policy row of the landing state.
    let kernel = vec![vec![vec![0.5, 0.5]; 2]; 2];
    let mdp = TabularAmdp::new(kernel, vec![vec![0.0; 2]; 2], 1.0).unwrap();
    let pi = Policy::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
    let p = induced_state_action_kernel(&mdp, &pi).unwrap();
    for i in 0..4 {
        for sp in 0..2 {
            for ap in 0..2 {
                assert!((p[(i, pair_index(sp, ap, 2))] - 0.5 * pi.probs[sp][ap]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn stationary_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mdp = random_mdp(&mut rng, 10, 2);
    let pi = random_policy(&mut rng, 10, 2);
    let p = induced_state_kernel(&mdp, &pi).unwrap();
    let nu = stationary_distribution(&p).unwrap();
    let mut power = p.clone();
    for _ in 0..11 {
        power = &power * &power; // P^2048
    }
    for s in 0..10 {
        assert!((power[(0, s)] - nu[s]).abs() < 1e-12);
    }
}

#[test]
fn average_cost_with_entropy_matches_long_rollout() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mdp = random_mdp(&mut rng, 4, 3);
    let pi = Policy::uniform(4, 3);
    let reg = Regularizer::entropy(0.5);
    let rho = average_cost(&mdp, &pi, &reg).unwrap();

    // independent rollout oracle: 1e6 steps of the chain, averaging c + h
    let h = reg.h_table(&pi);
    let mut s = 0usize;
    let mut acc = 0.0;
    let steps = 1_000_000usize;
    for _ in 0..steps {
        let a = sample_row(&mut rng, pi.row(s));
        acc += mdp.cost[s][a] + h[s];
        s = sample_row(&mut rng, mdp.kernel_row(s, a));
    }
    let estimate = acc / steps as f64;
    assert!(
        (estimate - rho).abs() < 5e-3 * mdp.cost_bound.max(1.0),
        "rollout {estimate} vs exact {rho}"
    );
}

fn sample_row(rng: &mut ChaCha8Rng, row: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}

#[test]
fn differential_values_match_truncated_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mdp = random_mdp(&mut rng, 5, 2);
    let pi = random_policy(&mut rng, 5, 2);
    let reg = Regularizer::entropy(0.3);
    let dv = differential_values(&mdp, &pi, &reg).unwrap();

    // oracle: Q = sum_{t=0}^{500} (P^pi)^t (c + h - rho 1)
    let p_pair = induced_state_action_kernel(&mdp, &pi).unwrap();
    let h = reg.h_table(&pi);
    let mut centered = DVector::zeros(10);
    for s in 0..5 {
        for a in 0..2 {
            centered[pair_index(s, a, 2)] = mdp.cost[s][a] + h[s] - dv.rho;
        }
    }
    let mut series = centered.clone();
    let mut term = centered.clone();
    for _ in 0..500 {
        term = &p_pair * term;
        series += &term;
    }
    for i in 0..10 {
        assert!(
            (series[i] - dv.q_bar[i]).abs() < 1e-6,
            "series {} vs solve {}",
            series[i],
            dv.q_bar[i]
        );
    }
    // anchoring: stationary mean of q_bar is zero
    assert!(dv.nu_sa.dot(&dv.q_bar).abs() < 1e-10);
}

#[test]
fn gradient_matches_central_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let mdp = random_mdp(&mut rng, 4, 3);
        let pi = random_policy(&mut rng, 4, 3);
        for reg in [Regularizer::none(), Regularizer::entropy(0.4)] {
            let grad = policy_gradient(&mdp, &pi, &reg).unwrap();
            // random per-state zero-sum direction
            let mut dir = vec![vec![0.0; 3]; 4];
            for row in dir.iter_mut() {
                let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean: f64 = raw.iter().sum::<f64>() / 3.0;
                for (d, r) in row.iter_mut().zip(raw) {
                    *d = r - mean;
                }
            }
            let step = 1e-5;
            let shift = |eps: f64| {
                let probs: Vec<Vec<f64>> = pi
                    .probs
                    .iter()
                    .zip(&dir)
                    .map(|(row, drow)| {
                        row.iter().zip(drow).map(|(p, d)| p + eps * d).collect()
                    })
                    .collect();
                Policy { probs }
            };
            let plus = average_cost(&mdp, &shift(step), &reg).unwrap();
            let minus = average_cost(&mdp, &shift(-step), &reg).unwrap();
            let fd = (plus - minus) / (2.0 * step);
            let analytic: f64 = grad
                .iter()
                .zip(&dir)
                .map(|(grow, drow)| grow.iter().zip(drow).map(|(g, d)| g * d).sum::<f64>())
                .sum();
            let scale = fd.abs().max(analytic.abs()).max(1e-3);
            assert!(
                (fd - analytic).abs() / scale < 1e-6,
                "fd {fd} vs analytic {analytic}"
            );
        }
    }
}

#[test]
fn performance_difference_identity_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..50 {
        let mdp = random_mdp(&mut rng, 6, 3);
        let pi = random_policy(&mut rng, 6, 3);
        let pi_prime = random_policy(&mut rng, 6, 3);
        for reg in [Regularizer::none(), Regularizer::entropy(0.2)] {
            let lhs = average_cost(&mdp, &pi_prime, &reg).unwrap()
                - average_cost(&mdp, &pi, &reg).unwrap();
            let rhs = performance_difference_rhs(&mdp, &reg, &pi, &pi_prime).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "lhs {lhs} rhs {rhs}");
        }
    }
}

#[test]
fn generalized_monotonicity_against_solved_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let mdp = random_mdp(&mut rng, 5, 2);
        let reg = Regularizer::none();
        let sol = solve_optimal(&mdp, &reg, 1e-10).unwrap();
        let p_star = induced_state_kernel(&mdp, &sol.policy).unwrap();
        let nu_star = stationary_distribution(&p_star).unwrap();
        for _ in 0..5 {
            let pi = random_policy(&mut rng, 5, 2);
            let dv = differential_values(&mdp, &pi, &reg).unwrap();
            let mut acc = 0.0;
            for s in 0..5 {
                let mut inner = 0.0;
                for a in 0..2 {
                    inner += dv.q_bar[pair_index(s, a, 2)]
                        * (pi.probs[s][a] - sol.policy.probs[s][a]);
                }
                acc += nu_star[s] * inner;
            }
            assert!(acc >= -1e-8, "monotonicity violated: {acc}");
        }
    }
}

#[test]
fn solve_optimal_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..10 {
        let mdp = random_mdp(&mut rng, 2, 2);
        let reg = Regularizer::none();
        let sol = solve_optimal(&mdp, &reg, 1e-10).unwrap();
        // an optimal deterministic policy exists; enumerate all four
        let mut best = f64::INFINITY;
        for a0 in 0..2 {
            for a1 in 0..2 {
                let pi = Policy::deterministic(&[a0, a1], 2);
                best = best.min(average_cost(&mdp, &pi, &reg).unwrap());
            }
        }
        assert!(
            (sol.rho - best).abs() < 1e-7,
            "solver {} vs enumeration {}",
            sol.rho,
            best
        );
    }
}

#[test]
fn mixing_bound_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..20 {
        let mdp = random_mdp(&mut rng, 6, 2);
        let pi = random_policy(&mut rng, 6, 2);
        let p = induced_state_kernel(&mdp, &pi).unwrap();
        let nu = stationary_distribution(&p).unwrap();
        let t_mix = mixing_time(&p, DEFAULT_T_MAX).unwrap();
        for mult in [1, 2, 5] {
            assert!(mixing_bound_check(&p, &nu, t_mix, mult * t_mix));
        }
    }
}

#[test]
fn stationary_info_reports_ergodicity_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let mdp = random_mdp(&mut rng, 6, 2);
    let pi = random_policy(&mut rng, 6, 2);
    let info = stationary_info(&mdp, &pi, &Regularizer::none()).unwrap();
    assert!(info.gamma_bound > 0.0 && info.gamma_bound < 1.0);
    assert!(info.t_mix >= 1);
    let nu_min = info.nu.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((1.0 - info.gamma_bound - nu_min).abs() < 1e-15);
}

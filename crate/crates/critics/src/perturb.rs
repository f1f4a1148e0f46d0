//! Exploratory perturbation of insufficiently random policies.

use amdp_core::Policy;

use crate::error::CriticError;

/// A perturbed policy with its support structure.
#[derive(Debug, Clone)]
pub struct PerturbedPolicy {
    pub policy: Policy,
    /// `support[s][a]` is true when `pi(a|s) > underline_pi / 2`.
    pub support: Vec<Vec<bool>>,
    pub min_support: usize,
    /// `alpha = 1 - (|A| - min_s |A_s|) underline_pi`.
    pub alpha: f64,
    /// False when every support set is full, in which case the perturbed
    /// policy equals the original one exactly.
    pub active: bool,
}

/// Builds the perturbed policy: off-support actions get probability
/// `underline_pi`, on-support masses are rescaled so each row stays in the
/// simplex.
pub fn construct_perturbed_policy(
    pi: &Policy,
    underline_pi: f64,
) -> Result<PerturbedPolicy, CriticError> {
    if !(underline_pi > 0.0 && underline_pi < 1.0) {
        return Err(CriticError::InvalidPerturbation(format!(
            "underline_pi = {underline_pi} outside (0, 1)"
        )));
    }
    let (n, m) = (pi.n_states(), pi.n_actions());
    let support: Vec<Vec<bool>> = pi
        .probs
        .iter()
        .map(|row| row.iter().map(|&p| p > underline_pi / 2.0).collect())
        .collect();
    let min_support = support
        .iter()
        .map(|row| row.iter().filter(|&&b| b).count())
        .min()
        .unwrap_or(0);
    if min_support == 0 {
        return Err(CriticError::InvalidPerturbation(
            "a state has an empty support set; underline_pi is too large".into(),
        ));
    }
    if min_support == m {
        return Ok(PerturbedPolicy {
            policy: pi.clone(),
            support,
            min_support,
            alpha: 1.0,
            active: false,
        });
    }
    if underline_pi > 1.0 / (m - min_support) as f64 {
        return Err(CriticError::InvalidPerturbation(format!(
            "underline_pi = {underline_pi} exceeds 1/(|A| - min|A_s|) = {}",
            1.0 / (m - min_support) as f64
        )));
    }
    let mut probs = Vec::with_capacity(n);
    for s in 0..n {
        let in_support = &support[s];
        let support_size = in_support.iter().filter(|&&b| b).count();
        let support_mass: f64 = pi.row(s)
            .iter()
            .zip(in_support)
            .filter(|(_, &b)| b)
            .map(|(&p, _)| p)
            .sum();
        let scale = (1.0 - (m - support_size) as f64 * underline_pi) / support_mass;
        let mut row: Vec<f64> = pi
            .row(s)
            .iter()
            .zip(in_support)
            .map(|(&p, &b)| if b { p * scale } else { underline_pi })
            .collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
        probs.push(row);
    }
    let policy = Policy::new(probs).map_err(CriticError::Core)?;
    Ok(PerturbedPolicy {
        policy,
        support,
        min_support,
        alpha: 1.0 - (m - min_support) as f64 * underline_pi,
        active: true,
    })
}

/// The largest exploration floor the monotonicity guarantee allows:
/// `(1-beta) nu_min / [(|A| - min|A_s|)(8 + (1-beta) nu_min)]`.
/// Returns `None` when every support set is already full.
pub fn underline_pi_bound(
    one_minus_beta: f64,
    nu_min: f64,
    n_actions: usize,
    min_support: usize,
) -> Option<f64> {
    assert!(one_minus_beta >= 0.0 && nu_min > 0.0 && n_actions >= 1);
    if min_support >= n_actions {
        return None;
    }
    let gap = (n_actions - min_support) as f64;
    Some(one_minus_beta * nu_min / (gap * (8.0 + one_minus_beta * nu_min)))
}

/// Resolves the circular dependence between the floor and the support sets it
/// defines by fixed-point iteration from the most conservative floor. Returns
/// `None` when no state needs perturbing at any candidate floor.
pub fn effective_underline_pi(pi: &Policy, one_minus_beta: f64, nu_min: f64) -> Option<f64> {
    let m = pi.n_actions();
    let min_support_at = |floor: f64| {
        pi.probs
            .iter()
            .map(|row| row.iter().filter(|&&p| p > floor / 2.0).count())
            .min()
            .unwrap_or(0)
    };
    let mut floor = underline_pi_bound(one_minus_beta, nu_min, m, 0)?;
    for _ in 0..10 {
        let support = min_support_at(floor);
        if support >= m {
            return None;
        }
        let next = underline_pi_bound(one_minus_beta, nu_min, m, support)?;
        if (next - floor).abs() < 1e-15 {
            break;
        }
        // keep the smaller, always-valid floor if the iteration oscillates
        if min_support_at(next) != support {
            return Some(floor.min(next));
        }
        floor = next;
    }
    Some(floor)
}

//! Convex policy regularizers `h^pi` and the KL Bregman geometry they share.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::model::Policy;
use crate::numeric::safe_ln;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegKind {
    None,
    NegativeEntropy,
    KlToReference,
}

/// A per-state convex function of the policy row with strong-convexity
/// modulus `omega` relative to the KL divergence.
///
/// Conventions: negative entropy is `h^pi(s) = omega * sum_a pi(a|s) ln pi(a|s)`
/// with `0 ln 0 = 0`; the KL variant measures against a fixed reference policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Regularizer {
    pub kind: RegKind,
    pub omega: f64,
    pub reference: Option<Policy>,
}

impl Regularizer {
    pub fn none() -> Self {
        Regularizer {
            kind: RegKind::None,
            omega: 0.0,
            reference: None,
        }
    }

    pub fn entropy(omega: f64) -> Self {
        assert!(omega >= 0.0);
        Regularizer {
            kind: RegKind::NegativeEntropy,
            omega,
            reference: None,
        }
    }

    pub fn kl_to_reference(omega: f64, reference: Policy) -> Self {
        assert!(omega >= 0.0);
        Regularizer {
            kind: RegKind::KlToReference,
            omega,
            reference: Some(reference),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kind, RegKind::None)
    }

    /// `h^pi(s)`.
    pub fn h_state(&self, pi: &Policy, s: usize) -> f64 {
        match self.kind {
            RegKind::None => 0.0,
            RegKind::NegativeEntropy => {
                let mut acc = 0.0;
                for &p in pi.row(s) {
                    if p > 0.0 {
                        acc += p * p.ln();
                    }
                }
                self.omega * acc
            }
            RegKind::KlToReference => {
                let reference = self.reference.as_ref().expect("reference policy set");
                let mut acc = 0.0;
                for (a, &p) in pi.row(s).iter().enumerate() {
                    if p > 0.0 {
                        acc += p * (p.ln() - safe_ln(reference.probs[s][a]));
                    }
                }
                self.omega * acc
            }
        }
    }

    /// `h^pi(s)` for every state.
    pub fn h_table(&self, pi: &Policy) -> Vec<f64> {
        (0..pi.n_states()).map(|s| self.h_state(pi, s)).collect()
    }

    /// Largest `|h^pi(s)|` over states; the `h`-part of the effective cost bound.
    pub fn h_bound(&self, pi: &Policy) -> f64 {
        (0..pi.n_states())
            .map(|s| self.h_state(pi, s).abs())
            .fold(0.0, f64::max)
    }

    /// Policy subgradient `grad h^pi(s, a)`. Log-based kinds need an interior
    /// row; a zero-probability action is a domain error there.
    pub fn grad(&self, pi: &Policy, s: usize, a: usize) -> Result<f64, CoreError> {
        match self.kind {
            RegKind::None => Ok(0.0),
            RegKind::NegativeEntropy => {
                let p = pi.probs[s][a];
                if p <= 0.0 {
                    return Err(CoreError::DomainError(format!(
                        "entropy gradient at zero-probability action ({s},{a})"
                    )));
                }
                Ok(self.omega * (p.ln() + 1.0))
            }
            RegKind::KlToReference => {
                let p = pi.probs[s][a];
                if p <= 0.0 {
                    return Err(CoreError::DomainError(format!(
                        "KL gradient at zero-probability action ({s},{a})"
                    )));
                }
                let r = self.reference.as_ref().expect("reference policy set").probs[s][a];
                Ok(self.omega * (p.ln() - safe_ln(r) + 1.0))
            }
        }
    }
}

/// `KL(p || q)` for probability rows, with `0 ln 0 = 0` and `q` clamped.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            acc += pi * (pi.ln() - safe_ln(qi));
        }
    }
    acc
}

/// `sum_s nu(s) KL(p(.|s) || q(.|s))`.
pub fn expected_kl(nu: &DVector<f64>, p: &Policy, q: &Policy) -> f64 {
    (0..p.n_states())
        .map(|s| nu[s] * kl_divergence(p.row(s), q.row(s)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_of_uniform_row() {
        let pi = Policy::uniform(2, 4);
        let reg = Regularizer::entropy(2.0);
        // omega * sum (1/4) ln(1/4) = -2 ln 4
        assert!((reg.h_state(&pi, 0) + 2.0 * (4.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_log_zero_convention() {
        let pi = Policy::deterministic(&[0, 1], 2);
        let reg = Regularizer::entropy(1.0);
        assert_eq!(reg.h_state(&pi, 0), 0.0);
        assert!(reg.grad(&pi, 0, 1).is_err());
    }

    /// The defining inequality: h^pi >= h^pi' + <grad h^pi', pi - pi'> + omega * KL(pi || pi').
    #[test]
    fn convexity_inequality_holds_numerically() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n_actions = 4;
        let reference = Policy::uniform(1, n_actions);
        for reg in [
            Regularizer::entropy(0.7),
            Regularizer::kl_to_reference(1.3, reference),
        ] {
            for _ in 0..200 {
                let rand_row = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let mut row: Vec<f64> = (0..n_actions).map(|_| rng.gen::<f64>() + 0.05).collect();
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                    row
                };
                let pi = Policy::new(vec![rand_row(&mut rng)]).unwrap();
                let pi_ref = Policy::new(vec![rand_row(&mut rng)]).unwrap();
                let mut linear = 0.0;
                for a in 0..n_actions {
                    linear += reg.grad(&pi_ref, 0, a).unwrap() * (pi.probs[0][a] - pi_ref.probs[0][a]);
                }
                let lhs = reg.h_state(&pi, 0) - reg.h_state(&pi_ref, 0) - linear;
                let rhs = reg.omega * kl_divergence(pi.row(0), pi_ref.row(0));
                assert!(lhs >= rhs - 1e-10, "convexity violated: {lhs} < {rhs}");
            }
        }
    }
}

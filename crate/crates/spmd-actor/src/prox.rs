//! The closed-form KL proximal update behind every actor step.

use amdp_core::numeric::{safe_ln, softmax_row};
use amdp_core::{pair_index, Policy, RegKind, Regularizer};

use crate::error::ActorError;

/// One mirror-descent step in log space:
/// unregularized rows get logits `ln pi_k - lambda Qhat`; with a strongly
/// convex regularizer the logits are damped by `1 / (1 + lambda omega)` (and
/// pulled toward the reference policy for the KL kind). Probabilities are
/// clamped away from zero before the log so near-deterministic iterates stay
/// finite, and every row is renormalized by a max-subtracted softmax.
pub fn kl_prox_update(
    pi: &Policy,
    q_hat: &[f64],
    lambda: f64,
    reg: &Regularizer,
) -> Result<Policy, ActorError> {
    let (n, m) = (pi.n_states(), pi.n_actions());
    assert_eq!(q_hat.len(), n * m, "Q estimate must cover all pairs");
    if lambda < 0.0 {
        return Err(ActorError::Config(format!("negative step size {lambda}")));
    }
    let mut probs = Vec::with_capacity(n);
    for s in 0..n {
        let mut logits = vec![0.0; m];
        for a in 0..m {
            let base = safe_ln(pi.probs[s][a]) - lambda * q_hat[pair_index(s, a, m)];
            logits[a] = match reg.kind {
                RegKind::None => base,
                RegKind::NegativeEntropy => base / (1.0 + lambda * reg.omega),
                RegKind::KlToReference => {
                    let reference = reg.reference.as_ref().expect("reference policy set");
                    (base + lambda * reg.omega * safe_ln(reference.probs[s][a]))
                        / (1.0 + lambda * reg.omega)
                }
            };
            if !logits[a].is_finite() {
                return Err(ActorError::Divergence {
                    iteration: 0,
                    detail: format!("non-finite logit at state {s}, action {a}"),
                });
            }
        }
        softmax_row(&mut logits);
        probs.push(logits);
    }
    Ok(Policy { probs })
}

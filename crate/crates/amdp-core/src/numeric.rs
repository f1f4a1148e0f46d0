//! Small shared numeric helpers.

/// Probabilities below this are treated as this value before taking logs, so
/// near-deterministic policies keep finite logits.
pub const LOG_CLAMP: f64 = 1e-300;

/// In-place softmax with max subtraction; `logits` becomes a probability row.
pub fn softmax_row(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

/// log of a probability, clamped away from zero.
#[inline]
pub fn safe_ln(p: f64) -> f64 {
    p.max(LOG_CLAMP).ln()
}

/// `min_b max_i |x_i + b|` together with the minimizing shift; the optimum is
/// the midpoint rule `b = -(max + min)/2` with value `(max - min)/2`.
pub fn centered_sup_norm(x: &[f64]) -> (f64, f64) {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    ((max - min) / 2.0, -(max + min) / 2.0)
}

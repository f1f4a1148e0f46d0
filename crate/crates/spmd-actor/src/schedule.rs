//! Step-size schedules for the actor.

/// Constant step size for unregularized runs with a uniformly random output
/// iterate: `sqrt(2 ln |A|) / (kappa sqrt(K))`.
pub fn stepsize_thm3(kappa: f64, k_iters: usize, n_actions: usize) -> f64 {
    assert!(kappa > 0.0 && k_iters >= 1 && n_actions >= 2);
    (2.0 * (n_actions as f64).ln()).sqrt() / (kappa * (k_iters as f64).sqrt())
}

/// Constant step size for regularized runs with a last-iterate output:
/// `min{(1-Gamma)/(omega Gamma), q ln K / (omega K)}`. Without a `q` (the
/// noiseless case, where it is undefined) only the first branch applies.
pub fn stepsize_thm4(omega: f64, gamma: f64, k_iters: usize, q: Option<f64>) -> f64 {
    assert!(omega > 0.0 && gamma > 0.0 && gamma < 1.0 && k_iters >= 1);
    let deterministic = (1.0 - gamma) / (omega * gamma);
    match q {
        Some(q) => deterministic.min(q * (k_iters as f64).ln() / (omega * k_iters as f64)),
        None => deterministic,
    }
}

/// The log-capped exponent:
/// `q = 2 (1 + ln((2 Gamma (1-Gamma) omega^2 D0 + 2 Gamma (1-Gamma) omega gap0) / sigma^2))`.
/// Undefined when `sigma = 0`; callers should then fall back to a user `q`.
pub fn q_oracle(omega: f64, gamma: f64, d0: f64, gap0: f64, sigma: f64) -> Option<f64> {
    if sigma <= 0.0 {
        return None;
    }
    let numerator =
        2.0 * gamma * (1.0 - gamma) * omega * omega * d0 + 2.0 * gamma * (1.0 - gamma) * omega * gap0;
    Some(2.0 * (1.0 + (numerator / (sigma * sigma)).ln()))
}

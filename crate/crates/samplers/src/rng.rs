//! Seed derivation and categorical sampling shared by all samplers.
//!
//! One master seed fans out into independent per-component streams via a
//! labeled splitmix-style hash, so runs are reproducible while components
//! (actor, critic, oracle, replicas) never share a stream.

use rand::Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for component `label` with stream index `index`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = master ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D));
    for &b in label.as_bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(h)
}

/// Draws an index from an unnormalized-tolerant probability row.
pub fn sample_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

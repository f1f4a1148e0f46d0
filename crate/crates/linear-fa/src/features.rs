//! Feature maps over state-action pairs.
//!
//! Two builders are provided: an "exact" orthonormal basis of the complement
//! of the all-ones direction (dimension `|S||A| - 1`, zero approximation error
//! for every policy) and a seeded random builder for genuinely approximate
//! features. Both guarantee row norms at most one and keep the all-ones vector
//! out of the column span.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::FaError;

/// Minimum principal angle (radians) the column span must keep from the
/// all-ones vector.
pub const ANGLE_THRESHOLD: f64 = 1e-3;

/// A feature matrix in row-major storage; row `i` is the feature vector of
/// the state-action pair with flat index `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMap {
    pub n_pairs: usize,
    pub dim: usize,
    rows: Vec<f64>,
}

impl FeatureMap {
    pub fn from_rows(n_pairs: usize, dim: usize, rows: Vec<f64>) -> Result<Self, FaError> {
        if rows.len() != n_pairs * dim {
            return Err(FaError::FeatureDegenerate(format!(
                "feature storage has {} entries, expected {}",
                rows.len(),
                n_pairs * dim
            )));
        }
        let map = FeatureMap { n_pairs, dim, rows };
        map.validate(ANGLE_THRESHOLD)?;
        Ok(map)
    }

    #[inline]
    pub fn row(&self, pair: usize) -> &[f64] {
        &self.rows[pair * self.dim..(pair + 1) * self.dim]
    }

    /// Column-major copy for dense linear algebra.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.n_pairs, self.dim, self.rows.iter().cloned())
    }

    /// `Psi theta` as a vector over pairs.
    pub fn apply(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_pairs);
        for i in 0..self.n_pairs {
            out[i] = dot(self.row(i), theta.as_slice());
        }
        out
    }

    /// Checks row norms, column rank, and the principal angle between the
    /// column span and the all-ones vector.
    pub fn validate(&self, angle_threshold: f64) -> Result<(), FaError> {
        for i in 0..self.n_pairs {
            let norm2: f64 = self.row(i).iter().map(|v| v * v).sum();
            if norm2 > 1.0 + 1e-12 {
                return Err(FaError::FeatureDegenerate(format!(
                    "feature row {i} has norm {} > 1",
                    norm2.sqrt()
                )));
            }
        }
        let psi = self.matrix();
        let svd = psi.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * s_max.max(1.0))
            .count();
        if rank < self.dim {
            return Err(FaError::FeatureDegenerate(format!(
                "feature matrix has rank {rank} < {}",
                self.dim
            )));
        }
        // principal angle between span(Psi) and 1: cos = ||proj 1|| / ||1||
        let ones = DVector::from_element(self.n_pairs, 1.0);
        let coeffs = svd
            .solve(&ones, 1e-12)
            .map_err(|e| FaError::FeatureDegenerate(format!("projection solve failed: {e}")))?;
        let proj = psi * coeffs;
        let cos = (proj.norm() / ones.norm()).min(1.0);
        let angle = cos.acos();
        if angle < angle_threshold {
            return Err(FaError::FeatureDegenerate(format!(
                "all-ones vector is only {angle:.2e} rad from the feature span"
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the complement of the all-ones direction, built from a
/// Householder reflection. Dimension is `n_pairs - 1` and every differential
/// Q-function is representable up to a constant shift, so the approximation
/// error vanishes for every policy.
pub fn build_exact_features(n_pairs: usize) -> FeatureMap {
    assert!(n_pairs >= 2);
    let n = n_pairs;
    // Householder H with H e_1 = 1/sqrt(n); columns 2..n span the complement.
    let target = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut v = -target;
    v[0] += 1.0; // v = e_1 - target
    let v_norm2 = v.norm_squared();
    let mut rows = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 1..n {
            let e = if i == j { 1.0 } else { 0.0 };
            rows.push(e - 2.0 * v[i] * v[j] / v_norm2);
        }
    }
    FeatureMap {
        n_pairs: n,
        dim: n - 1,
        rows,
    }
}

/// Seeded random features: uniform entries, columns projected off the all-ones
/// direction, rows jointly rescaled into the unit ball, then rank-validated.
pub fn build_random_features(n_pairs: usize, dim: usize, seed: u64) -> Result<FeatureMap, FaError> {
    assert!(dim >= 1 && dim < n_pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = DMatrix::from_fn(n_pairs, dim, |_, _| rng.gen_range(-1.0..1.0));
    for j in 0..dim {
        let mean: f64 = psi.column(j).sum() / n_pairs as f64;
        for i in 0..n_pairs {
            psi[(i, j)] -= mean;
        }
    }
    let max_row_norm = (0..n_pairs)
        .map(|i| psi.row(i).norm())
        .fold(0.0f64, f64::max);
    if max_row_norm > 1.0 {
        psi /= max_row_norm;
    }
    let rows: Vec<f64> = (0..n_pairs)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| psi[(i, j)])
        .collect();
    FeatureMap::from_rows(n_pairs, dim, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_basis_is_orthonormal_and_avoids_ones() {
        let f = build_exact_features(6);
        let psi = f.matrix();
        let gram = psi.transpose() * &psi;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-12);
            }
        }
        let ones = DVector::from_element(6, 1.0);
        let against_ones = psi.transpose() * ones;
        assert!(against_ones.abs().max() < 1e-12);
        f.validate(ANGLE_THRESHOLD).unwrap();
    }

    #[test]
    fn random_features_are_deterministic_per_seed() {
        let a = build_random_features(12, 4, 9).unwrap();
        let b = build_random_features(12, 4, 9).unwrap();
        assert_eq!(a.row(5), b.row(5));
        let c = build_random_features(12, 4, 10).unwrap();
        assert_ne!(a.row(5), c.row(5));
    }

    #[test]
    fn all_row_norms_within_unit_ball() {
        for seed in 0..20 {
            let f = build_random_features(15, 6, seed).unwrap();
            for i in 0..15 {
                let n2: f64 = f.row(i).iter().map(|v| v * v).sum();
                assert!(n2 <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn ones_in_span_is_rejected() {
        // two constant-ish columns: second column is exactly the ones vector
        let mut rows = Vec::new();
        for i in 0..4 {
            rows.push(0.1 * i as f64);
            rows.push(0.5);
        }
        let err = FeatureMap::from_rows(4, 2, rows).unwrap_err();
        assert!(matches!(err, FaError::FeatureDegenerate(_)));
    }
}

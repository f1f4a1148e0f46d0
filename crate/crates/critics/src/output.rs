//! Common result shape for every critic.

use nalgebra::DVector;

/// The differential-Q estimate a critic hands to the actor: either a full
/// table over state-action pairs or coefficients for a shared feature map.
#[derive(Debug, Clone)]
pub enum QEstimate {
    Table(Vec<f64>),
    Linear { theta: DVector<f64> },
}

impl QEstimate {
    /// Materializes the estimate as a table, applying the feature map when
    /// the estimate is linear.
    pub fn to_table(&self, features: Option<&linear_fa::FeatureMap>) -> Vec<f64> {
        match self {
            QEstimate::Table(t) => t.clone(),
            QEstimate::Linear { theta } => {
                let f = features.expect("feature map required for a linear estimate");
                f.apply(theta).as_slice().to_vec()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub rho_hat: f64,
    pub theta: DVector<f64>,
    /// Cumulative transitions consumed up to the end of this epoch.
    pub samples_used: u64,
}

#[derive(Debug, Clone)]
pub struct CriticOutput {
    pub rho_hat: f64,
    pub q: QEstimate,
    /// Model transitions consumed by this run.
    pub samples_used: u64,
    /// Per-epoch trace; empty for single-shot critics.
    pub epochs: Vec<EpochRecord>,
    /// Whether an exploratory perturbation was in effect.
    pub perturbation_active: bool,
}

//! Anomaly detectors over trained models: reconstruction-error thresholding
//! and an isolation forest on latent representations.

mod iforest;

pub use iforest::IsolationForest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum AnomalyError {
    #[error("cannot fit a threshold on an empty error array")]
    EmptyErrors,
    #[error("non-finite reconstruction error in training data")]
    NonFiniteErrors,
    #[error("isolation forest needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("subsample size must be >= 2, got {0}")]
    SubsampleTooSmall(usize),
    #[error("latent dimension mismatch: forest fitted on {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
}

/// Reconstruction-error threshold fitted as a percentile (default 95th) of
/// the normal training errors. A sample is anomalous iff its error is
/// strictly greater than `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDetector {
    pub tau: f64,
    pub percentile: f64,
}

impl ThresholdDetector {
    pub fn classify(&self, scores: &[f64]) -> Vec<bool> {
        scores.iter().map(|s| *s > self.tau).collect()
    }
}

/// Fit the threshold at the 95th percentile of the training errors.
pub fn fit_threshold(train_errors: &[f64]) -> Result<ThresholdDetector, AnomalyError> {
    fit_threshold_at(train_errors, 95.0)
}

/// Fit at an arbitrary percentile, using linear interpolation between order
/// statistics.
pub fn fit_threshold_at(
    train_errors: &[f64],
    percentile: f64,
) -> Result<ThresholdDetector, AnomalyError> {
    if train_errors.is_empty() {
        return Err(AnomalyError::EmptyErrors);
    }
    if train_errors.iter().any(|e| !e.is_finite()) {
        return Err(AnomalyError::NonFiniteErrors);
    }
    let mut sorted = train_errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ThresholdDetector {
        tau: percentile_linear(&sorted, percentile),
        percentile,
    })
}

/// Linear-interpolation percentile of an already sorted slice.
fn percentile_linear(sorted: &[f64], percentile: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * percentile / 100.0;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

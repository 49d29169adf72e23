//! Seeded training loop with Adam and early stopping.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Number of consecutive non-improving epochs tolerated before stopping;
    /// 0 stops after the first non-improving epoch.
    pub patience: usize,
    pub min_delta: f64,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            max_epochs: 200,
            patience: 10,
            min_delta: 1e-5,
            validation_fraction: 0.1,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NnError> {
        if self.batch_size < 1 {
            return Err(NnError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(NnError::InvalidConfig(
                "validation_fraction must be in (0, 1)".into(),
            ));
        }
        if self.max_epochs == 0 {
            return Err(NnError::InvalidConfig("max_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// One minibatch: feature rows plus optional per-row targets.
pub struct Batch<'a> {
    pub x: ArrayView2<'a, f64>,
    pub y: Option<&'a [f64]>,
}

/// Anything the loop can train: an architecture over a flat parameter
/// vector with a differentiable batch loss.
pub trait Trainable {
    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// Mean loss over the batch and its gradient. `rng` drives stochastic
    /// elements such as reparameterization noise (training mode).
    fn batch_loss_grad(
        &self,
        params: &[f64],
        batch: Batch<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>), NnError>;

    /// Deterministic evaluation-mode loss (no sampling).
    fn batch_loss(&self, params: &[f64], batch: Batch<'_>) -> Result<f64, NnError>;
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedParams {
    pub params: Vec<f64>,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Train on `x` (with optional targets `y`), carving a validation fraction
/// off the end of a seeded shuffle. Returns the parameters of the best
/// validation epoch.
pub fn train_loop<M: Trainable>(
    model: &M,
    x: ArrayView2<f64>,
    y: Option<&[f64]>,
    cfg: &TrainConfig,
) -> Result<TrainedParams, NnError> {
    cfg.validate()?;
    let n = x.nrows();
    if n == 0 {
        return Err(NnError::EmptyTrainingSet);
    }
    if let Some(y) = y {
        if y.len() != n {
            return Err(NnError::ShapeMismatch {
                expected: format!("{n} targets"),
                actual: format!("{}", y.len()),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = model.init_params(&mut rng);

    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let n_val = ((n as f64 * cfg.validation_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let (train_idx, val_idx) = if n == 1 {
        (indices.clone(), indices.clone())
    } else {
        let split = n - n_val;
        (indices[..split].to_vec(), indices[split..].to_vec())
    };

    let gather = |idx: &[usize]| -> (Array2<f64>, Option<Vec<f64>>) {
        let xs = x.select(Axis(0), idx);
        let ys = y.map(|y| idx.iter().map(|&i| y[i]).collect());
        (xs, ys)
    };
    let (val_x, val_y) = gather(&val_idx);

    let mut adam = AdamState::with_lr(params.len(), cfg.learning_rate);
    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut bad_epochs = 0usize;
    let mut train_order = train_idx;

    for epoch in 0..cfg.max_epochs {
        train_order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for (b, chunk) in train_order.chunks(cfg.batch_size).enumerate() {
            let (bx, by) = gather(chunk);
            let (loss, grad) = model.batch_loss_grad(
                &params,
                Batch {
                    x: bx.view(),
                    y: by.as_deref(),
                },
                &mut rng,
            )?;
            if !loss.is_finite() {
                return Err(NnError::Diverged { epoch, batch: b });
            }
            adam.step(&mut params, &grad)?;
            epoch_loss += loss;
            n_batches += 1;
        }
        let train_loss = epoch_loss / n_batches.max(1) as f64;
        let val_loss = model.batch_loss(
            &params,
            Batch {
                x: val_x.view(),
                y: val_y.as_deref(),
            },
        )?;
        if !val_loss.is_finite() {
            return Err(NnError::Diverged { epoch, batch: usize::MAX });
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });

        if val_loss < best_val - cfg.min_delta {
            best_val = val_loss;
            best_params = params.clone();
            best_epoch = epoch;
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
            if bad_epochs > cfg.patience {
                break;
            }
        }
    }

    Ok(TrainedParams {
        params: best_params,
        history,
        best_epoch,
        best_val_loss: best_val,
    })
}

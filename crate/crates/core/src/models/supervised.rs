//! Supervised baseline: the classical encoder with a sigmoid output unit,
//! trained with binary cross-entropy.

use ndarray::{Array1, Array2, ArrayView2};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, ParamCounts};
use crate::nncore::{Activation, Batch, NnError, Stack, StageSpec, Trainable};

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` inside the loss.
pub const PROB_CLIP: f64 = 1e-7;

/// Mean binary cross-entropy over a batch of probabilities:
/// `-[y ln p + (1 - y) ln(1 - p)]` with clipped `p`.
pub fn supervised_loss(p: &[f64], y: &[f64]) -> Result<f64, NnError> {
    if p.len() != y.len() {
        return Err(NnError::ShapeMismatch {
            expected: y.len().to_string(),
            actual: p.len().to_string(),
        });
    }
    if p.is_empty() {
        return Err(NnError::EmptyTrainingSet);
    }
    let total: f64 = p
        .iter()
        .zip(y)
        .map(|(pi, yi)| {
            let pi = pi.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            -(yi * pi.ln() + (1.0 - yi) * (1.0 - pi).ln())
        })
        .sum();
    Ok(total / p.len() as f64)
}

/// Classical encoder through the latent layer, plus a single output unit.
/// The stack produces logits; [`SupervisedModel::proba`] applies the
/// sigmoid. Training uses the numerically stable logits form of the same
/// cross-entropy.
pub struct SupervisedModel {
    stack: Stack,
}

impl SupervisedModel {
    pub(super) fn build(cfg: &ModelConfig, input_dim: usize) -> Self {
        let mut stages = Vec::new();
        let mut dim = input_dim;
        for &w in &cfg.encoder_widths {
            stages.push(StageSpec::Dense {
                in_dim: dim,
                out_dim: w,
                activation: Activation::Relu,
            });
            dim = w;
        }
        stages.push(StageSpec::Dense {
            in_dim: dim,
            out_dim: cfg.latent_dim,
            activation: Activation::Identity,
        });
        stages.push(StageSpec::Dense {
            in_dim: cfg.latent_dim,
            out_dim: 1,
            activation: Activation::Identity,
        });
        Self {
            stack: Stack::new(stages),
        }
    }

    pub fn param_count(&self) -> usize {
        self.stack.param_count()
    }

    pub fn param_counts(&self) -> ParamCounts {
        ParamCounts {
            dense: self.stack.param_count(),
            quantum: 0,
        }
    }

    fn logits(&self, params: &[f64], x: ArrayView2<f64>) -> Result<Array1<f64>, NnError> {
        let trace = self.stack.forward(params, x, None)?;
        Ok(trace.output.column(0).to_owned())
    }

    /// Anomaly probabilities in (0, 1).
    pub fn proba(&self, params: &[f64], x: ArrayView2<f64>) -> Result<Array1<f64>, NnError> {
        Ok(self
            .logits(params, x)?
            .mapv(|l| 1.0 / (1.0 + (-l).exp())))
    }

    fn bce_with_logits(&self, logits: &Array1<f64>, y: &[f64]) -> f64 {
        logits
            .iter()
            .zip(y)
            .map(|(l, yi)| l.max(0.0) - l * yi + (1.0 + (-l.abs()).exp()).ln())
            .sum::<f64>()
            / y.len() as f64
    }
}

impl Trainable for SupervisedModel {
    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.stack.init_params(rng)
    }

    fn batch_loss_grad(
        &self,
        params: &[f64],
        batch: Batch<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>), NnError> {
        let y = batch.y.ok_or(NnError::ShapeMismatch {
            expected: "binary labels".into(),
            actual: "none".into(),
        })?;
        let trace = self.stack.forward(params, batch.x, None)?;
        let logits = trace.output.column(0).to_owned();
        let loss = self.bce_with_logits(&logits, y);
        // d BCE / d logit = sigmoid(logit) - y, averaged over the batch.
        let b = y.len() as f64;
        let mut upstream = Array2::zeros((y.len(), 1));
        for (i, (l, yi)) in logits.iter().zip(y).enumerate() {
            upstream[[i, 0]] = (1.0 / (1.0 + (-l).exp()) - yi) / b;
        }
        let mut grad = vec![0.0; params.len()];
        self.stack.backward(params, &trace, upstream, &mut grad)?;
        Ok((loss, grad))
    }

    fn batch_loss(&self, params: &[f64], batch: Batch<'_>) -> Result<f64, NnError> {
        let y = batch.y.ok_or(NnError::ShapeMismatch {
            expected: "binary labels".into(),
            actual: "none".into(),
        })?;
        let logits = self.logits(params, batch.x)?;
        Ok(self.bce_with_logits(&logits, y))
    }
}

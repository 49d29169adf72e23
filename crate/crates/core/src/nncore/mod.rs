//! Minimal dense-network core with reverse-mode gradients.
//!
//! Models are architecture descriptions ([`Stack`]) over a single flat
//! parameter vector; [`train_loop`] owns the vector, drives Adam, and
//! applies early stopping on a validation carve-out. All randomness is
//! seeded, so a fixed seed reproduces trained parameters bit-for-bit.

mod adam;
mod layer;
mod loss;
mod stack;
mod train;

pub use adam::AdamState;
pub use layer::{Activation, DenseLayer};
pub use loss::{
    kl_loss, kl_loss_batch, latent_reg_loss, mse_loss, mse_per_sample, reparameterize,
    total_loss, LossConfig, LOGVAR_CLAMP,
};
pub use stack::{Stack, StackTrace, StageSpec};
pub use train::{train_loop, Batch, EpochStats, TrainConfig, Trainable, TrainedParams};

use thiserror::Error;

#[derive(Error, Debug)]
pub enum NnError {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("loss weights must be non-negative (alpha={alpha}, beta={beta})")]
    NegativeWeight { alpha: f64, beta: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("non-finite loss at epoch {epoch}, batch {batch}: training diverged")]
    Diverged { epoch: usize, batch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Qsim(#[from] crate::qsim::QsimError),
}

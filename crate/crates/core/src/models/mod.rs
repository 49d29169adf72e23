//! Model construction: the four autoencoder types, their hybrid variants,
//! and the supervised baseline.
//!
//! A `ModelConfig` pins one architecture. The quantum embedding is derived
//! from the placement: an early quantum layer sits right after a single
//! classical projection to `2^N` features (amplitude embedding), a late
//! quantum layer sits after the full width stack compressed to `N` features
//! (angle embedding). Decoders are always classical and mirror the
//! configured widths.

mod autoencoder;
mod grid;
mod supervised;

pub use autoencoder::{AeOutput, AutoencoderModel};
pub use grid::{enumerate_grid, ConfigTemplate};
pub use supervised::{supervised_loss, SupervisedModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nncore::{LossConfig, TrainConfig};
use crate::qsim::{Embedding, Entanglement, MeasurementKind, QuantumLayerSpec};

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("classical family must not set a quantum-layer placement")]
    ClassicalWithPlacement,
    #[error("hqc family requires a quantum-layer placement")]
    HqcWithoutPlacement,
    #[error("hqc family requires a measurement kind")]
    HqcWithoutMeasurement,
    #[error("encoder widths must be non-empty")]
    EmptyWidths,
    #[error("latent dimension must be >= 1")]
    ZeroLatent,
    #[error("{0} weight must be > 0 when the corresponding term is enabled")]
    NonPositiveWeight(&'static str),
    #[error("supervised baseline uses the classical family")]
    SupervisedHqc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Classical,
    Hqc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Early,
    Late,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    ReconThreshold,
    LatentIforest,
}

impl Detection {
    pub fn short_name(self) -> &'static str {
        match self {
            Detection::ReconThreshold => "recon",
            Detection::LatentIforest => "iforest",
        }
    }
}

/// Circuit shape shared by all hybrid variants of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumParams {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub entanglement: Entanglement,
}

impl Default for QuantumParams {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            n_layers: 2,
            entanglement: Entanglement::AllPairs,
        }
    }
}

/// Full description of one model variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dataset_id: String,
    pub family: Family,
    /// Supervised baseline: classical encoder plus a sigmoid output unit.
    pub supervised: bool,
    pub placement: Option<Placement>,
    pub measurement: Option<MeasurementKind>,
    pub variational: bool,
    pub latent_reg: bool,
    pub encoder_widths: Vec<usize>,
    pub latent_dim: usize,
    pub quantum: QuantumParams,
    /// Latent-regularization weight applied when `latent_reg` is set.
    pub alpha: f64,
    /// KL weight applied when `variational` is set.
    pub beta: f64,
    pub train: TrainConfig,
    pub detection: Detection,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.family {
            Family::Classical if self.placement.is_some() => {
                return Err(ConfigError::ClassicalWithPlacement)
            }
            Family::Hqc if self.placement.is_none() => {
                return Err(ConfigError::HqcWithoutPlacement)
            }
            Family::Hqc if self.measurement.is_none() => {
                return Err(ConfigError::HqcWithoutMeasurement)
            }
            _ => {}
        }
        if self.supervised && self.family != Family::Classical {
            return Err(ConfigError::SupervisedHqc);
        }
        if self.encoder_widths.is_empty() {
            return Err(ConfigError::EmptyWidths);
        }
        if self.latent_dim == 0 {
            return Err(ConfigError::ZeroLatent);
        }
        if self.variational && self.beta <= 0.0 {
            return Err(ConfigError::NonPositiveWeight("beta"));
        }
        if self.latent_reg && self.alpha <= 0.0 {
            return Err(ConfigError::NonPositiveWeight("alpha"));
        }
        Ok(())
    }

    /// Embedding implied by the placement: early operates on a `2^N`
    /// projection (amplitude), late on an `N` projection (angle).
    pub fn embedding(&self) -> Option<Embedding> {
        self.placement.map(|p| match p {
            Placement::Early => Embedding::Amplitude,
            Placement::Late => Embedding::Angle,
        })
    }

    pub fn qspec(&self) -> Option<QuantumLayerSpec> {
        let embedding = self.embedding()?;
        let measurement = self.measurement?;
        Some(QuantumLayerSpec::new(
            self.quantum.n_qubits,
            self.quantum.n_layers,
            embedding,
            measurement,
            self.quantum.entanglement,
        ))
    }

    /// Effective loss weights: zero for disabled terms.
    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            alpha: if self.latent_reg { self.alpha } else { 0.0 },
            beta: if self.variational { self.beta } else { 0.0 },
        }
    }

    /// Architecture identifier, stable across seeds and detection choices,
    /// e.g. `cls-vae-reg` or `hqc-early-expval-ae`.
    pub fn arch_id(&self) -> String {
        if self.supervised {
            return "sup-cls".to_string();
        }
        let kind = match (self.variational, self.latent_reg) {
            (false, false) => "ae",
            (false, true) => "ae-reg",
            (true, false) => "vae",
            (true, true) => "vae-reg",
        };
        match self.family {
            Family::Classical => format!("cls-{kind}"),
            Family::Hqc => {
                let placement = match self.placement {
                    Some(Placement::Early) => "early",
                    Some(Placement::Late) => "late",
                    None => "none",
                };
                let measurement = match self.measurement {
                    Some(MeasurementKind::Expval) => "expval",
                    Some(MeasurementKind::Probs) => "probs",
                    None => "none",
                };
                format!("hqc-{placement}-{measurement}-{kind}")
            }
        }
    }

    /// Run identifier including the detection mechanism.
    pub fn config_id(&self) -> String {
        format!("{}+{}", self.arch_id(), self.detection.short_name())
    }
}

/// A built model, ready for the training loop.
pub enum BuiltModel {
    Autoencoder(AutoencoderModel),
    Supervised(SupervisedModel),
}

impl BuiltModel {
    pub fn param_count(&self) -> usize {
        match self {
            BuiltModel::Autoencoder(m) => m.param_count(),
            BuiltModel::Supervised(m) => m.param_count(),
        }
    }

    pub fn param_counts(&self) -> ParamCounts {
        match self {
            BuiltModel::Autoencoder(m) => m.param_counts(),
            BuiltModel::Supervised(m) => m.param_counts(),
        }
    }
}

/// Trainable-parameter counts, split by domain. Hybrid variants replace a
/// dense block with `L*N*3` circuit angles; the report makes the comparison
/// explicit without claiming exact parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCounts {
    pub dense: usize,
    pub quantum: usize,
}

impl ParamCounts {
    pub fn total(&self) -> usize {
        self.dense + self.quantum
    }
}

/// Validate the configuration and construct the model, running the static
/// shape audit (stage dimension chaining) in the process.
pub fn build_model(cfg: &ModelConfig, input_dim: usize) -> Result<BuiltModel, ConfigError> {
    cfg.validate()?;
    if cfg.supervised {
        Ok(BuiltModel::Supervised(SupervisedModel::build(
            cfg, input_dim,
        )))
    } else {
        Ok(BuiltModel::Autoencoder(AutoencoderModel::build(
            cfg, input_dim,
        )))
    }
}

#[cfg(test)]
pub(crate) fn test_config(family: Family) -> ModelConfig {
    ModelConfig {
        dataset_id: "test".into(),
        family,
        supervised: false,
        placement: match family {
            Family::Classical => None,
            Family::Hqc => Some(Placement::Early),
        },
        measurement: match family {
            Family::Classical => None,
            Family::Hqc => Some(MeasurementKind::Expval),
        },
        variational: false,
        latent_reg: false,
        encoder_widths: vec![32, 16],
        latent_dim: 8,
        quantum: QuantumParams::default(),
        alpha: 1e-2,
        beta: 1e-3,
        train: TrainConfig::default(),
        detection: Detection::ReconThreshold,
        seed: 0,
    }
}

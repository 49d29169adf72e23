//! Enumeration of the experiment grid.

use super::{Detection, Family, ModelConfig, Placement, QuantumParams};
use crate::nncore::TrainConfig;
use crate::qsim::MeasurementKind;

/// Shared settings for every configuration in a grid.
#[derive(Debug, Clone)]
pub struct ConfigTemplate {
    pub encoder_widths: Vec<usize>,
    pub latent_dim: usize,
    pub quantum: QuantumParams,
    pub alpha: f64,
    pub beta: f64,
    pub train: TrainConfig,
}

impl Default for ConfigTemplate {
    fn default() -> Self {
        Self {
            encoder_widths: vec![32, 16],
            latent_dim: 8,
            quantum: QuantumParams::default(),
            alpha: 1e-2,
            beta: 1e-3,
            train: TrainConfig::default(),
        }
    }
}

impl ConfigTemplate {
    pub fn config(&self, dataset_id: &str, family: Family) -> ModelConfig {
        ModelConfig {
            dataset_id: dataset_id.to_string(),
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
            encoder_widths: self.encoder_widths.clone(),
            latent_dim: self.latent_dim,
            quantum: self.quantum,
            alpha: self.alpha,
            beta: self.beta,
            train: self.train,
            detection: Detection::ReconThreshold,
            seed: 0,
        }
    }

    pub fn supervised_config(&self, dataset_id: &str) -> ModelConfig {
        let mut cfg = self.config(dataset_id, Family::Classical);
        cfg.supervised = true;
        cfg
    }
}

/// The architecture grid: per dataset, 4 classical configurations
/// (variational x latent_reg) and 16 hybrid ones (placement x measurement x
/// variational x latent_reg), in a fixed deterministic order. Detection
/// mechanisms and seeds are crossed at run planning, not here.
pub fn enumerate_grid(
    dataset_ids: &[&str],
    families: &[Family],
    template: &ConfigTemplate,
) -> Vec<ModelConfig> {
    let mut configs = Vec::new();
    for dataset in dataset_ids {
        for family in families {
            match family {
                Family::Classical => {
                    for variational in [false, true] {
                        for latent_reg in [false, true] {
                            let mut cfg = template.config(dataset, Family::Classical);
                            cfg.variational = variational;
                            cfg.latent_reg = latent_reg;
                            configs.push(cfg);
                        }
                    }
                }
                Family::Hqc => {
                    for placement in [Placement::Early, Placement::Late] {
                        for measurement in [MeasurementKind::Expval, MeasurementKind::Probs] {
                            for variational in [false, true] {
                                for latent_reg in [false, true] {
                                    let mut cfg = template.config(dataset, Family::Hqc);
                                    cfg.placement = Some(placement);
                                    cfg.measurement = Some(measurement);
                                    cfg.variational = variational;
                                    cfg.latent_reg = latent_reg;
                                    configs.push(cfg);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    configs
}

//! Experiment configuration file (TOML) and its stable hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use qnad_core::models::{ConfigTemplate, QuantumParams};
use qnad_core::nncore::TrainConfig;
use qnad_core::qsim::Entanglement;

#[derive(Error, Debug)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("config parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("dataset `{0}` is not declared in the config")]
    UnknownDataset(String),
    #[error("invalid value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub out_dir: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_workers() -> usize {
    1
}

fn default_sigmas() -> Vec<f64> {
    qnad_core::evalstats::DEFAULT_SIGMAS.to_vec()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_widths")]
    pub encoder_widths: Vec<usize>,
    #[serde(default = "default_latent")]
    pub latent_dim: usize,
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_layers")]
    pub n_layers: usize,
    #[serde(default)]
    pub entanglement: EntanglementName,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            encoder_widths: default_widths(),
            latent_dim: default_latent(),
            n_qubits: default_qubits(),
            n_layers: default_layers(),
            entanglement: EntanglementName::default(),
            alpha: default_alpha(),
            beta: default_beta(),
        }
    }
}

fn default_widths() -> Vec<usize> {
    vec![32, 16]
}
fn default_latent() -> usize {
    8
}
fn default_qubits() -> usize {
    4
}
fn default_layers() -> usize {
    2
}
fn default_alpha() -> f64 {
    1e-2
}
fn default_beta() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementName {
    #[default]
    AllPairs,
    Ring,
}

impl From<EntanglementName> for Entanglement {
    fn from(value: EntanglementName) -> Self {
        match value {
            EntanglementName::AllPairs => Entanglement::AllPairs,
            EntanglementName::Ring => Entanglement::Ring,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_min_delta")]
    pub min_delta: f64,
    #[serde(default = "default_val_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            batch_size: default_batch(),
            max_epochs: default_epochs(),
            patience: default_patience(),
            min_delta: default_min_delta(),
            validation_fraction: default_val_fraction(),
            learning_rate: default_lr(),
        }
    }
}

fn default_batch() -> usize {
    256
}
fn default_epochs() -> usize {
    100
}
fn default_patience() -> usize {
    10
}
fn default_min_delta() -> f64 {
    1e-5
}
fn default_val_fraction() -> f64 {
    0.1
}
fn default_lr() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default = "default_trees")]
    pub iforest_trees: usize,
    #[serde(default = "default_psi")]
    pub iforest_psi: usize,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self {
            percentile: default_percentile(),
            iforest_trees: default_trees(),
            iforest_psi: default_psi(),
        }
    }
}

fn default_percentile() -> f64 {
    95.0
}
fn default_trees() -> usize {
    100
}
fn default_psi() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoaoSection {
    #[serde(default = "default_loao_classical")]
    pub classical_model: String,
    #[serde(default = "default_loao_hqc")]
    pub hqc_model: String,
}

impl Default for LoaoSection {
    fn default() -> Self {
        Self {
            classical_model: default_loao_classical(),
            hqc_model: default_loao_hqc(),
        }
    }
}

fn default_loao_classical() -> String {
    "cls-ae".to_string()
}
fn default_loao_hqc() -> String {
    "hqc-early-expval-ae".to_string()
}

/// One dataset entry; `kind` picks how files map to a split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSection {
    /// Seeded generator; no files needed.
    Synthetic {
        #[serde(default = "default_n_normal")]
        n_normal: usize,
        #[serde(default = "default_n_anomalies")]
        n_anomalies: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default)]
        gen_seed: u64,
    },
    /// Official train/test files pass through (UNSW-NB15, NSL-KDD).
    ProvidedSplit {
        schema: PathBuf,
        train_file: PathBuf,
        test_file: PathBuf,
    },
    /// Pooled captures sampled into train/test (CIC-IDS2017).
    SampleFraction {
        schema: PathBuf,
        files: Vec<PathBuf>,
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default)]
        exclude: Option<String>,
        #[serde(default)]
        sample_seed: u64,
    },
}

fn default_n_normal() -> usize {
    2000
}
fn default_n_anomalies() -> usize {
    200
}
fn default_dim() -> usize {
    32
}
fn default_fraction() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub detect: DetectSection,
    #[serde(default)]
    pub loao: LoaoSection,
    pub datasets: BTreeMap<String, DatasetSection>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigFileError::Unreadable {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| ConfigFileError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if config.experiment.seeds.is_empty() {
            return Err(ConfigFileError::Invalid("seed list must be non-empty".into()));
        }
        if config.experiment.workers == 0 {
            return Err(ConfigFileError::Invalid("workers must be >= 1".into()));
        }
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    pub fn dataset(&self, id: &str) -> Result<&DatasetSection, ConfigFileError> {
        self.datasets
            .get(id)
            .ok_or_else(|| ConfigFileError::UnknownDataset(id.to_string()))
    }

    /// Resolve a config-relative path.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Output directory, honoring the `QNAD_OUT_DIR` override.
    pub fn out_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(dir) = cli_override {
            return dir.to_path_buf();
        }
        if let Ok(dir) = std::env::var("QNAD_OUT_DIR") {
            return PathBuf::from(dir);
        }
        self.resolve(&self.experiment.out_dir)
    }

    /// Stable hash of the resolved configuration; recorded into every
    /// artifact.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn template(&self) -> ConfigTemplate {
        ConfigTemplate {
            encoder_widths: self.model.encoder_widths.clone(),
            latent_dim: self.model.latent_dim,
            quantum: QuantumParams {
                n_qubits: self.model.n_qubits,
                n_layers: self.model.n_layers,
                entanglement: self.model.entanglement.into(),
            },
            alpha: self.model.alpha,
            beta: self.model.beta,
            train: TrainConfig {
                batch_size: self.train.batch_size,
                max_epochs: self.train.max_epochs,
                patience: self.train.patience,
                min_delta: self.train.min_delta,
                validation_fraction: self.train.validation_fraction,
                learning_rate: self.train.learning_rate,
                seed: 0,
            },
        }
    }
}

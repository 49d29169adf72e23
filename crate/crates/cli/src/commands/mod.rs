//! Subcommand implementations and shared cell machinery.

pub mod grid;
pub mod loao;
pub mod noise;
pub mod prepare;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use qnad_core::anomaly::{fit_threshold_at, IsolationForest, ThresholdDetector};
use qnad_core::data::DatasetSplit;
use qnad_core::evalstats::{auroc, Protocol, RunResult};
use qnad_core::models::{
    build_model, AutoencoderModel, BuiltModel, ConfigTemplate, Detection, Family, ModelConfig,
    Placement, SupervisedModel,
};
use qnad_core::nncore::train_loop;
use qnad_core::qsim::MeasurementKind;

use crate::config::{DetectSection, ExperimentConfig};

pub fn dataset_dir(out_dir: &Path, dataset: &str) -> PathBuf {
    out_dir.join(dataset)
}

pub fn snapshot_path(out_dir: &Path, dataset: &str) -> PathBuf {
    dataset_dir(out_dir, dataset).join("snapshot.bin")
}

pub fn load_prepared(out_dir: &Path, dataset: &str) -> anyhow::Result<(DatasetSplit, String)> {
    let path = snapshot_path(out_dir, dataset);
    let (split, config_hash, _) = qnad_core::data::load_snapshot(&path).with_context(|| {
        format!(
            "no prepared snapshot for `{dataset}`; run `qnad prepare --dataset {dataset}` first"
        )
    })?;
    Ok((split, config_hash))
}

/// Parse an architecture selector such as `cls-ae`, `cls-vae-reg`,
/// `hqc-early-probs-ae`, `hqc-late-expval-vae-reg`, or `sup-cls`.
pub fn parse_selector(
    selector: &str,
    template: &ConfigTemplate,
    dataset: &str,
) -> anyhow::Result<ModelConfig> {
    fn parse_kind(parts: &[&str]) -> Option<(bool, bool)> {
        match parts {
            ["ae"] => Some((false, false)),
            ["ae", "reg"] => Some((false, true)),
            ["vae"] => Some((true, false)),
            ["vae", "reg"] => Some((true, true)),
            _ => None,
        }
    }

    let parts: Vec<&str> = selector.split('-').collect();
    let cfg = match parts.as_slice() {
        ["sup", "cls"] => Some(template.supervised_config(dataset)),
        ["cls", rest @ ..] => parse_kind(rest).map(|(variational, latent_reg)| {
            let mut cfg = template.config(dataset, Family::Classical);
            cfg.variational = variational;
            cfg.latent_reg = latent_reg;
            cfg
        }),
        ["hqc", placement, measurement, rest @ ..] => {
            let placement = match *placement {
                "early" => Some(Placement::Early),
                "late" => Some(Placement::Late),
                _ => None,
            };
            let measurement = match *measurement {
                "expval" => Some(MeasurementKind::Expval),
                "probs" => Some(MeasurementKind::Probs),
                _ => None,
            };
            match (placement, measurement, parse_kind(rest)) {
                (Some(p), Some(m), Some((variational, latent_reg))) => {
                    let mut cfg = template.config(dataset, Family::Hqc);
                    cfg.placement = Some(p);
                    cfg.measurement = Some(m);
                    cfg.variational = variational;
                    cfg.latent_reg = latent_reg;
                    Some(cfg)
                }
                _ => None,
            }
        }
        _ => None,
    };
    match cfg {
        Some(cfg) => Ok(cfg),
        None => bail!(
            "unknown model selector `{selector}`; expected `sup-cls`, \
             `cls-(ae|vae)[-reg]`, or `hqc-(early|late)-(expval|probs)-(ae|vae)[-reg]`"
        ),
    }
}

/// Serialized trained model: flat parameters plus shapes and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub arch_id: String,
    pub seed: u64,
    pub config_hash: String,
    pub input_dim: usize,
    pub param_count: usize,
    pub params: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub config: ModelConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorArtifact {
    pub version: u32,
    pub arch_id: String,
    pub seed: u64,
    pub config_hash: String,
    pub threshold: ThresholdDetector,
    pub forest: IsolationForest,
}

pub fn model_artifact_path(out_dir: &Path, dataset: &str, arch_id: &str, seed: u64) -> PathBuf {
    dataset_dir(out_dir, dataset).join(format!("models/{arch_id}_s{seed}.json"))
}

pub fn detector_artifact_path(out_dir: &Path, dataset: &str, arch_id: &str, seed: u64) -> PathBuf {
    dataset_dir(out_dir, dataset).join(format!("detectors/{arch_id}_s{seed}.json"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub struct CellOutput {
    pub records: Vec<RunResult>,
    pub model_artifact: ModelArtifact,
    pub detector_artifact: Option<DetectorArtifact>,
    pub test_latents: Option<Array2<f64>>,
}

/// Train one configuration on the prepared split and evaluate it on the
/// full test set. Autoencoders train on the normal-only view and are
/// scored by both detection mechanisms; the supervised baseline trains on
/// the full labeled training set and is scored by its output probability.
pub fn run_cell(
    split: &DatasetSplit,
    cfg: &ModelConfig,
    detect: &DetectSection,
    config_hash: &str,
) -> anyhow::Result<CellOutput> {
    let started = Instant::now();
    let mut cfg = cfg.clone();
    cfg.train.seed = cfg.seed;
    let built = build_model(&cfg, split.n_features())?;
    match built {
        BuiltModel::Autoencoder(model) => {
            autoencoder_cell(split, &cfg, model, detect, config_hash, started)
        }
        BuiltModel::Supervised(model) => {
            supervised_cell(split, &cfg, model, config_hash, started)
        }
    }
}

fn autoencoder_cell(
    split: &DatasetSplit,
    cfg: &ModelConfig,
    model: AutoencoderModel,
    detect: &DetectSection,
    config_hash: &str,
    started: Instant,
) -> anyhow::Result<CellOutput> {
    let trained = train_loop(&model, split.normal_train_x.view(), None, &cfg.train)?;

    let train_errors = model.recon_errors(&trained.params, split.normal_train_x.view(), None)?;
    let threshold = fit_threshold_at(train_errors.as_slice().unwrap(), detect.percentile)?;

    let train_latents = model.latents(&trained.params, split.normal_train_x.view(), None)?;
    let forest = IsolationForest::fit(
        train_latents.view(),
        detect.iforest_trees,
        detect.iforest_psi.min(train_latents.nrows()),
        cfg.seed,
    )?;

    let test_errors = model.recon_errors(&trained.params, split.test_x.view(), None)?;
    let test_latents = model.latents(&trained.params, split.test_x.view(), None)?;
    let recon_auroc = auroc(test_errors.as_slice().unwrap(), &split.test_label)?;
    let iforest_scores = forest.score_batch(test_latents.view())?;
    let iforest_auroc = auroc(&iforest_scores, &split.test_label)?;

    let wall_time_ms = started.elapsed().as_millis() as u64;
    let records = vec![
        RunResult::new(
            cfg,
            Detection::ReconThreshold,
            Protocol::FullTest,
            recon_auroc,
            wall_time_ms,
            config_hash,
        ),
        RunResult::new(
            cfg,
            Detection::LatentIforest,
            Protocol::FullTest,
            iforest_auroc,
            wall_time_ms,
            config_hash,
        ),
    ];
    Ok(CellOutput {
        records,
        model_artifact: ModelArtifact {
            version: 1,
            arch_id: cfg.arch_id(),
            seed: cfg.seed,
            config_hash: config_hash.to_string(),
            input_dim: split.n_features(),
            param_count: trained.params.len(),
            params: trained.params,
            best_epoch: trained.best_epoch,
            best_val_loss: trained.best_val_loss,
            config: cfg.clone(),
        },
        detector_artifact: Some(DetectorArtifact {
            version: 1,
            arch_id: cfg.arch_id(),
            seed: cfg.seed,
            config_hash: config_hash.to_string(),
            threshold,
            forest,
        }),
        test_latents: Some(test_latents),
    })
}

fn supervised_cell(
    split: &DatasetSplit,
    cfg: &ModelConfig,
    model: SupervisedModel,
    config_hash: &str,
    started: Instant,
) -> anyhow::Result<CellOutput> {
    let labels: Vec<f64> = split
        .train_label
        .iter()
        .map(|l| if *l { 1.0 } else { 0.0 })
        .collect();
    let trained = train_loop(&model, split.train_x.view(), Some(&labels), &cfg.train)?;
    let proba = model.proba(&trained.params, split.test_x.view())?;
    let sup_auroc = auroc(proba.as_slice().unwrap(), &split.test_label)?;
    let wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(CellOutput {
        records: vec![RunResult::new(
            cfg,
            Detection::ReconThreshold,
            Protocol::FullTest,
            sup_auroc,
            wall_time_ms,
            config_hash,
        )],
        model_artifact: ModelArtifact {
            version: 1,
            arch_id: cfg.arch_id(),
            seed: cfg.seed,
            config_hash: config_hash.to_string(),
            input_dim: split.n_features(),
            param_count: trained.params.len(),
            params: trained.params,
            best_epoch: trained.best_epoch,
            best_val_loss: trained.best_val_loss,
            config: cfg.clone(),
        },
        detector_artifact: None,
        test_latents: None,
    })
}

pub fn save_cell_artifacts(
    out_dir: &Path,
    dataset: &str,
    cell: &CellOutput,
) -> anyhow::Result<()> {
    let arch_id = &cell.model_artifact.arch_id;
    let seed = cell.model_artifact.seed;
    write_json(
        &model_artifact_path(out_dir, dataset, arch_id, seed),
        &cell.model_artifact,
    )?;
    if let Some(detector) = &cell.detector_artifact {
        write_json(
            &detector_artifact_path(out_dir, dataset, arch_id, seed),
            detector,
        )?;
    }
    Ok(())
}

/// Raw latent vectors of the test set for external plotting.
pub fn write_latents_csv(
    path: &Path,
    latents: &Array2<f64>,
    split: &DatasetSplit,
) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = String::from("label,category");
    for j in 0..latents.ncols() {
        out.push_str(&format!(",z{j}"));
    }
    out.push('\n');
    for (i, row) in latents.outer_iter().enumerate() {
        let label = if split.test_label[i] { 1 } else { 0 };
        let category = split.test_category[i].as_deref().unwrap_or("normal");
        out.push_str(&format!("{label},{category}"));
        for v in row {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Distinct, deterministic noise seed per (run seed, sigma index) cell.
pub fn derive_noise_seed(seed: u64, sigma_idx: usize) -> u64 {
    (seed ^ 0xA5A5_5A5A_0F0F_F0F0)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(sigma_idx as u64 + 1)
}

/// Rebuild a trained model from its artifact.
pub fn model_from_artifact(
    artifact: &ModelArtifact,
) -> anyhow::Result<(AutoencoderModel, Vec<f64>)> {
    match build_model(&artifact.config, artifact.input_dim)? {
        BuiltModel::Autoencoder(model) => Ok((model, artifact.params.clone())),
        BuiltModel::Supervised(_) => bail!("artifact {} is not an autoencoder", artifact.arch_id),
    }
}

pub fn reports_dir(out_dir: &Path, dataset: &str) -> PathBuf {
    dataset_dir(out_dir, dataset).join("reports")
}

pub fn write_report(out_dir: &Path, dataset: &str, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let dir = reports_dir(out_dir, dataset);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// The experiment-wide context threaded into every subcommand.
pub struct Ctx {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub workers: usize,
}

impl Ctx {
    pub fn new(config: ExperimentConfig, out_override: Option<&Path>, workers: Option<usize>) -> Self {
        let out_dir = config.out_dir(out_override);
        let config_hash = config.hash();
        let workers = workers.unwrap_or(config.experiment.workers).max(1);
        Self {
            config,
            out_dir,
            config_hash,
            workers,
        }
    }

    pub fn store(&self, dataset: &str) -> crate::store::RunStore {
        crate::store::RunStore::new(&dataset_dir(&self.out_dir, dataset))
    }
}

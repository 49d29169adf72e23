//! Evaluation and statistics: AUROC, per-config aggregation over seeds,
//! paired t-tests, and the noise-sweep table.

mod auroc;
mod report;
mod ttest;

pub use auroc::auroc;
pub use report::{
    best_model_report, comparison_csv, factor_report, interaction_csv, interaction_report,
    noise_csv, protocol_csv, protocol_report, summary_csv, ComparisonRow, InteractionCell,
    ProtocolRow,
};
pub use ttest::{paired_ttest, t_cdf, t_quantile, StatTestResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{Detection, Family, ModelConfig, Placement, QuantumParams};
use crate::qsim::{avg_gate_fidelity, MeasurementKind};

#[derive(Error, Debug)]
pub enum StatsError {
    #[error("AUROC needs both classes present")]
    SingleClass,
    #[error("score and label lengths differ: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("paired test needs at least 2 paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

/// The noise levels of the gate-error study.
pub const DEFAULT_SIGMAS: [f64; 6] = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0];

/// Evaluation protocol a run was scored under.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "category")]
pub enum Protocol {
    FullTest,
    Loao(String),
}

impl Protocol {
    pub fn key(&self) -> String {
        match self {
            Protocol::FullTest => "full_test".to_string(),
            Protocol::Loao(category) => format!("loao:{category}"),
        }
    }
}

/// The atom of all statistics: one (config, dataset, seed, detection,
/// protocol) evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub config_id: String,
    pub arch_id: String,
    pub dataset_id: String,
    pub seed: u64,
    pub detection: Detection,
    pub protocol: Protocol,
    pub family: Family,
    pub supervised: bool,
    pub placement: Option<Placement>,
    pub measurement: Option<MeasurementKind>,
    pub variational: bool,
    pub latent_reg: bool,
    pub auroc: f64,
    pub wall_time_ms: u64,
    pub config_hash: String,
    pub quantum: Option<QuantumParams>,
}

impl RunResult {
    pub fn new(
        cfg: &ModelConfig,
        detection: Detection,
        protocol: Protocol,
        auroc: f64,
        wall_time_ms: u64,
        config_hash: &str,
    ) -> Self {
        let mut keyed = cfg.clone();
        keyed.detection = detection;
        Self {
            config_id: keyed.config_id(),
            arch_id: cfg.arch_id(),
            dataset_id: cfg.dataset_id.clone(),
            seed: cfg.seed,
            detection,
            protocol,
            family: cfg.family,
            supervised: cfg.supervised,
            placement: cfg.placement,
            measurement: cfg.measurement,
            variational: cfg.variational,
            latent_reg: cfg.latent_reg,
            auroc,
            wall_time_ms,
            config_hash: config_hash.to_string(),
            quantum: (cfg.family == Family::Hqc).then_some(cfg.quantum),
        }
    }
}

/// Per-config mean and sample standard deviation over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub dataset_id: String,
    pub config_id: String,
    pub protocol_key: String,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub n_seeds: usize,
}

/// Aggregate run results per (dataset, config, protocol), sorted by mean
/// AUROC descending. Groups with fewer than 2 seeds are excluded and
/// reported as warnings.
pub fn aggregate(results: &[RunResult]) -> (Vec<ConfigSummary>, Vec<String>) {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.dataset_id.clone(), r.config_id.clone(), r.protocol.key()))
            .or_default()
            .push(r.auroc);
    }
    let mut warnings = Vec::new();
    let mut summaries = Vec::new();
    for ((dataset_id, config_id, protocol_key), values) in groups {
        if values.len() < 2 {
            warnings.push(format!(
                "{dataset_id}/{config_id}/{protocol_key}: only {} seed(s), excluded from summary",
                values.len()
            ));
            continue;
        }
        let (mean, std) = mean_std(&values);
        summaries.push(ConfigSummary {
            dataset_id,
            config_id,
            protocol_key,
            mean_auroc: mean,
            std_auroc: std,
            n_seeds: values.len(),
        });
    }
    summaries.sort_by(|a, b| {
        b.mean_auroc
            .partial_cmp(&a.mean_auroc)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.config_id.cmp(&b.config_id))
    });
    (summaries, warnings)
}

/// Mean and sample standard deviation (n-1 denominator; 0 for n == 1).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// One row of the noise study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRow {
    pub sigma: f64,
    pub f_avg: f64,
    pub r: f64,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub aurocs: Vec<f64>,
}

/// Evaluate AUROC under each noise level for each seed. `eval(sigma, seed)`
/// must give every (sigma, seed) cell its own derived noise seed; the
/// sigma = 0 column must equal the noiseless evaluation bit-for-bit, which
/// holds by the `NoiseConfig` contract.
pub fn noise_sweep<E>(
    sigmas: &[f64],
    seeds: &[u64],
    mut eval: impl FnMut(f64, u64) -> Result<f64, E>,
) -> Result<Vec<NoiseRow>, E> {
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let mut aurocs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            aurocs.push(eval(sigma, seed)?);
        }
        let (mean, std) = mean_std(&aurocs);
        let (f_avg, r) = avg_gate_fidelity(sigma).expect("sigma grid is non-negative");
        rows.push(NoiseRow {
            sigma,
            f_avg,
            r,
            mean_auroc: mean,
            std_auroc: std,
            aurocs,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{test_config, Family};

    fn run(config_id: &str, seed: u64, auroc: f64) -> RunResult {
        let mut cfg = test_config(Family::Classical);
        cfg.seed = seed;
        let mut r = RunResult::new(
            &cfg,
            Detection::ReconThreshold,
            Protocol::FullTest,
            auroc,
            1,
            "h",
        );
        r.config_id = config_id.to_string();
        r
    }

    #[test]
    fn aggregate_examples() {
        let results = vec![run("a", 0, 0.9), run("a", 1, 0.9)];
        let (summaries, warnings) = aggregate(&results);
        assert!(warnings.is_empty());
        assert_eq!(summaries[0].mean_auroc, 0.9);
        assert_eq!(summaries[0].std_auroc, 0.0);

        let results = vec![run("a", 0, 0.8), run("a", 1, 1.0)];
        let (summaries, _) = aggregate(&results);
        assert!((summaries[0].mean_auroc - 0.9).abs() < 1e-12);
        assert!((summaries[0].std_auroc - 0.1414).abs() < 1e-4);
    }

    #[test]
    fn single_seed_is_excluded_with_warning() {
        let results = vec![run("a", 0, 0.8), run("b", 0, 0.9), run("b", 1, 0.7)];
        let (summaries, warnings) = aggregate(&results);
        assert_eq!(summaries.len(), 1);
        assert_eq!(summaries[0].config_id, "b");
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("only 1 seed"));
    }

    #[test]
    fn aggregate_sorts_by_mean_descending() {
        let results = vec![
            run("low", 0, 0.5),
            run("low", 1, 0.5),
            run("high", 0, 0.9),
            run("high", 1, 0.9),
        ];
        let (summaries, _) = aggregate(&results);
        assert_eq!(summaries[0].config_id, "high");
    }

    #[test]
    fn noise_sweep_shapes_and_fidelity_columns() {
        let rows =
            noise_sweep::<()>(&DEFAULT_SIGMAS, &[0, 1], |sigma, seed| {
                Ok(1.0 - sigma * 0.1 - seed as f64 * 0.01)
            })
            .unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].sigma, 0.0);
        assert_eq!(rows[0].f_avg, 1.0);
        assert_eq!(rows[0].r, 0.0);
        assert!(rows[1].r > 1.6e-5 && rows[1].r < 1.8e-5);
        assert!(rows[5].mean_auroc < rows[0].mean_auroc);
    }

    #[test]
    fn protocol_keys() {
        assert_eq!(Protocol::FullTest.key(), "full_test");
        assert_eq!(Protocol::Loao("dos".into()).key(), "loao:dos");
    }
}

//! Report shaping: best-model comparison, design-factor paired tests,
//! placement x measurement interaction, and protocol (full test vs
//! leave-one-attack-out) summaries, plus their CSV forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ttest::{paired_ttest, StatTestResult};
use super::{mean_std, ConfigSummary, NoiseRow, Protocol, RunResult};
use crate::models::{Detection, Family, Placement};
use crate::qsim::MeasurementKind;

/// A two-level comparison: per-level summary statistics plus the paired
/// test over matched runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub factor: String,
    pub level_a: String,
    pub level_b: String,
    pub mean_a: f64,
    pub std_a: f64,
    pub mean_b: f64,
    pub std_b: f64,
    pub test: StatTestResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionCell {
    pub placement: String,
    pub measurement: String,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub protocol: String,
    pub model_class: String,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub n: usize,
}

/// Best classical vs best hybrid configuration on the full test set,
/// paired by seed; delta is hybrid minus classical.
pub fn best_model_report(runs: &[RunResult]) -> Option<ComparisonRow> {
    let full: Vec<&RunResult> = runs
        .iter()
        .filter(|r| r.protocol == Protocol::FullTest && !r.supervised)
        .collect();
    let best_hqc = best_config(&full, Family::Hqc)?;
    let best_cls = best_config(&full, Family::Classical)?;
    let a = seed_values(&full, &best_hqc);
    let b = seed_values(&full, &best_cls);
    let seeds: Vec<u64> = a
        .keys()
        .filter(|s| b.contains_key(*s))
        .copied()
        .collect();
    if seeds.len() < 2 {
        return None;
    }
    let av: Vec<f64> = seeds.iter().map(|s| a[s]).collect();
    let bv: Vec<f64> = seeds.iter().map(|s| b[s]).collect();
    let test = paired_ttest(&av, &bv, 0.01).ok()?;
    let (mean_a, std_a) = mean_std(&av);
    let (mean_b, std_b) = mean_std(&bv);
    Some(ComparisonRow {
        factor: "best_model".to_string(),
        level_a: best_hqc,
        level_b: best_cls,
        mean_a,
        std_a,
        mean_b,
        std_b,
        test,
    })
}

fn best_config(runs: &[&RunResult], family: Family) -> Option<String> {
    let mut per_config: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.family == family) {
        per_config
            .entry(r.config_id.clone())
            .or_default()
            .push(r.auroc);
    }
    per_config
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(id, v)| {
            let (mean, std) = mean_std(&v);
            (id, mean, std)
        })
        .max_by(|(ida, ma, sa), (idb, mb, sb)| {
            ma.partial_cmp(mb)
                .unwrap()
                .then(sb.partial_cmp(sa).unwrap())
                .then(idb.cmp(ida))
        })
        .map(|(id, _, _)| id)
}

fn seed_values(runs: &[&RunResult], config_id: &str) -> BTreeMap<u64, f64> {
    runs.iter()
        .filter(|r| r.config_id == config_id)
        .map(|r| (r.seed, r.auroc))
        .collect()
}

/// The five design factors, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Detection,
    Variational,
    LatentReg,
    Placement,
    Measurement,
}

impl Factor {
    pub const ALL: [Factor; 5] = [
        Factor::Detection,
        Factor::Variational,
        Factor::LatentReg,
        Factor::Placement,
        Factor::Measurement,
    ];

    fn name(self) -> &'static str {
        match self {
            Factor::Detection => "Detection Mechanism",
            Factor::Variational => "Variational Objective",
            Factor::LatentReg => "Latent Regularization",
            Factor::Placement => "QLayer Placement",
            Factor::Measurement => "QLayer Measurement",
        }
    }

    fn levels(self) -> (&'static str, &'static str) {
        match self {
            Factor::Detection => ("Recon. Error Thresholding", "Downstream Model (IF)"),
            Factor::Variational => ("Standard AE", "VAE"),
            Factor::LatentReg => ("Without Regularization", "With Regularization"),
            Factor::Placement => ("Early Stage", "Late Stage"),
            Factor::Measurement => ("Expectation Value", "Probabilities"),
        }
    }

    /// Whether a run sits at the first level of this factor.
    fn is_first_level(self, run: &RunResult) -> bool {
        match self {
            Factor::Detection => run.detection == Detection::ReconThreshold,
            Factor::Variational => !run.variational,
            Factor::LatentReg => !run.latent_reg,
            Factor::Placement => run.placement == Some(Placement::Early),
            Factor::Measurement => run.measurement == Some(MeasurementKind::Expval),
        }
    }

    /// Key of everything except this factor; runs sharing a key form one
    /// matched pair.
    fn pair_key(self, run: &RunResult) -> String {
        let detection = run.detection.short_name();
        let placement = match run.placement {
            Some(Placement::Early) => "early",
            Some(Placement::Late) => "late",
            None => "-",
        };
        let measurement = match run.measurement {
            Some(MeasurementKind::Expval) => "expval",
            Some(MeasurementKind::Probs) => "probs",
            None => "-",
        };
        let var = run.variational;
        let reg = run.latent_reg;
        let mut parts = vec![run.dataset_id.clone(), run.seed.to_string()];
        if self != Factor::Detection {
            parts.push(detection.to_string());
        }
        if self != Factor::Placement {
            parts.push(placement.to_string());
        }
        if self != Factor::Measurement {
            parts.push(measurement.to_string());
        }
        if self != Factor::Variational {
            parts.push(var.to_string());
        }
        if self != Factor::LatentReg {
            parts.push(reg.to_string());
        }
        parts.join("|")
    }
}

/// Paired design-factor analysis over the hybrid full-test runs: one row
/// per factor, pairing runs that differ only in that factor (same dataset,
/// seed, and remaining factor levels).
pub fn factor_report(runs: &[RunResult]) -> Vec<ComparisonRow> {
    let hqc: Vec<&RunResult> = runs
        .iter()
        .filter(|r| r.family == Family::Hqc && !r.supervised && r.protocol == Protocol::FullTest)
        .collect();
    let mut rows = Vec::new();
    for factor in Factor::ALL {
        let mut pairs: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();
        for run in &hqc {
            let slot = pairs.entry(factor.pair_key(run)).or_default();
            if factor.is_first_level(run) {
                slot.0 = Some(run.auroc);
            } else {
                slot.1 = Some(run.auroc);
            }
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (_, (first, second)) in pairs {
            if let (Some(x), Some(y)) = (first, second) {
                a.push(x);
                b.push(y);
            }
        }
        if a.len() < 2 {
            continue;
        }
        let test = match paired_ttest(&a, &b, 0.01) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let (mean_a, std_a) = mean_std(&a);
        let (mean_b, std_b) = mean_std(&b);
        let (level_a, level_b) = factor.levels();
        rows.push(ComparisonRow {
            factor: factor.name().to_string(),
            level_a: level_a.to_string(),
            level_b: level_b.to_string(),
            mean_a,
            std_a,
            mean_b,
            std_b,
            test,
        });
    }
    rows
}

/// Mean AUROC per placement x measurement combination over hybrid
/// full-test runs.
pub fn interaction_report(runs: &[RunResult]) -> Vec<InteractionCell> {
    let mut cells = Vec::new();
    for placement in [Placement::Early, Placement::Late] {
        for measurement in [MeasurementKind::Expval, MeasurementKind::Probs] {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| {
                    r.family == Family::Hqc
                        && r.protocol == Protocol::FullTest
                        && r.placement == Some(placement)
                        && r.measurement == Some(measurement)
                })
                .map(|r| r.auroc)
                .collect();
            if values.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&values);
            cells.push(InteractionCell {
                placement: format!("{placement:?}").to_lowercase(),
                measurement: format!("{measurement:?}").to_lowercase(),
                mean_auroc: mean,
                std_auroc: std,
                n_runs: values.len(),
            });
        }
    }
    cells
}

/// Supervised/unsupervised rows under both protocols. `classes` maps a row
/// label to the config id whose runs populate it. Full-test rows aggregate
/// over seeds; leave-one-attack-out rows average seeds within each held-out
/// category first, then report mean and std across categories.
pub fn protocol_report(runs: &[RunResult], classes: &[(&str, &str)]) -> Vec<ProtocolRow> {
    let mut rows = Vec::new();
    for (class_name, config_id) in classes {
        let full: Vec<f64> = runs
            .iter()
            .filter(|r| r.config_id == *config_id && r.protocol == Protocol::FullTest)
            .map(|r| r.auroc)
            .collect();
        if !full.is_empty() {
            let (mean, std) = mean_std(&full);
            rows.push(ProtocolRow {
                protocol: "full_test".to_string(),
                model_class: class_name.to_string(),
                mean_auroc: mean,
                std_auroc: std,
                n: full.len(),
            });
        }

        let mut per_category: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in runs.iter().filter(|r| r.config_id == *config_id) {
            if let Protocol::Loao(category) = &r.protocol {
                per_category
                    .entry(category.clone())
                    .or_default()
                    .push(r.auroc);
            }
        }
        if !per_category.is_empty() {
            let category_means: Vec<f64> = per_category
                .values()
                .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                .collect();
            let (mean, std) = mean_std(&category_means);
            rows.push(ProtocolRow {
                protocol: "loao".to_string(),
                model_class: class_name.to_string(),
                mean_auroc: mean,
                std_auroc: std,
                n: category_means.len(),
            });
        }
    }
    rows
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "factor,level_a,level_b,mean_a,std_a,mean_b,std_b,n_pairs,delta,ci99_lo,ci99_hi,p_value,d_z,significant\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            r.factor,
            r.level_a,
            r.level_b,
            r.mean_a,
            r.std_a,
            r.mean_b,
            r.std_b,
            r.test.n,
            r.test.delta,
            r.test.ci99.0,
            r.test.ci99.1,
            r.test.p_value,
            r.test.d_z,
            r.test.significant
        ));
    }
    out
}

pub fn interaction_csv(cells: &[InteractionCell]) -> String {
    let mut out = String::from("placement,measurement,mean_auroc,std_auroc,n_runs\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            c.placement, c.measurement, c.mean_auroc, c.std_auroc, c.n_runs
        ));
    }
    out
}

pub fn protocol_csv(rows: &[ProtocolRow]) -> String {
    let mut out = String::from("protocol,model_class,mean_auroc,std_auroc,n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            r.protocol, r.model_class, r.mean_auroc, r.std_auroc, r.n
        ));
    }
    out
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut out = String::from("sigma,f_avg,r,mean_auroc,std_auroc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.8},{:.8},{:.6},{:.6}\n",
            r.sigma, r.f_avg, r.r, r.mean_auroc, r.std_auroc
        ));
    }
    out
}

pub fn summary_csv(summaries: &[ConfigSummary]) -> String {
    let mut out = String::from("dataset_id,config_id,protocol,mean_auroc,std_auroc,n_seeds\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{}\n",
            s.dataset_id, s.config_id, s.protocol_key, s.mean_auroc, s.std_auroc, s.n_seeds
        ));
    }
    out
}

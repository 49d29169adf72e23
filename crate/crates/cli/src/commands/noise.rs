//! `noise`: coherent gate-noise sweep over the best hybrid model from a
//! completed grid. Noise perturbs evaluation only; the trained parameters
//! and fitted detectors stay fixed.

use std::collections::BTreeMap;

use anyhow::{bail, Context};

use qnad_core::evalstats::{auroc, mean_std, noise_csv, noise_sweep, Protocol};
use qnad_core::models::{Detection, Family};
use qnad_core::qsim::{NoiseConfig, NoiseSession};

use super::{
    derive_noise_seed, detector_artifact_path, load_prepared, model_artifact_path,
    model_from_artifact, read_json, write_report, Ctx, DetectorArtifact, ModelArtifact,
};

pub fn cmd_noise(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    let (split, _) = load_prepared(&ctx.out_dir, dataset)?;
    let store = ctx.store(dataset);
    let records = store.load()?;

    // Best hybrid configuration: highest mean AUROC over seeds, ties broken
    // by lower std.
    let mut by_config: BTreeMap<String, Vec<(u64, f64)>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.family == Family::Hqc && r.protocol == Protocol::FullTest)
    {
        by_config
            .entry(r.config_id.clone())
            .or_default()
            .push((r.seed, r.auroc));
    }
    let Some((best_id, cells)) = by_config
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(id, v)| {
            let values: Vec<f64> = v.iter().map(|(_, a)| *a).collect();
            let (mean, std) = mean_std(&values);
            (id, v, mean, std)
        })
        .max_by(|(ida, _, ma, sa), (idb, _, mb, sb)| {
            ma.partial_cmp(mb)
                .unwrap()
                .then(sb.partial_cmp(sa).unwrap())
                .then(idb.cmp(ida))
        })
        .map(|(id, v, _, _)| (id, v))
    else {
        bail!("no hybrid runs with >= 2 seeds in the store; run `qnad grid` first");
    };
    let arch_id = best_id.split('+').next().unwrap_or(&best_id).to_string();
    let detection = if best_id.ends_with("+iforest") {
        Detection::LatentIforest
    } else {
        Detection::ReconThreshold
    };
    let mut seeds: Vec<u64> = cells.iter().map(|(s, _)| *s).collect();
    seeds.sort_unstable();
    println!(
        "noise sweep on `{dataset}`: best hybrid config {best_id} ({} seeds)",
        seeds.len()
    );

    // Load the trained artifacts once.
    let mut models = BTreeMap::new();
    for &seed in &seeds {
        let path = model_artifact_path(&ctx.out_dir, dataset, &arch_id, seed);
        let artifact: ModelArtifact = read_json(&path)
            .with_context(|| format!("missing model artifact for {arch_id} seed {seed}"))?;
        let detector: DetectorArtifact =
            read_json(&detector_artifact_path(&ctx.out_dir, dataset, &arch_id, seed))?;
        models.insert(seed, (artifact, detector));
    }

    let sigmas = &ctx.config.experiment.sigmas;
    let sigma_index: BTreeMap<u64, usize> = sigmas
        .iter()
        .enumerate()
        .map(|(i, s)| (s.to_bits(), i))
        .collect();

    let rows = noise_sweep(sigmas, &seeds, |sigma, seed| -> anyhow::Result<f64> {
        let (artifact, detector) = &models[&seed];
        let (model, params) = model_from_artifact(artifact)?;
        let noise = NoiseConfig::new(sigma, derive_noise_seed(seed, sigma_index[&sigma.to_bits()]))?;
        let mut session = NoiseSession::new(&noise)?;
        let scores: Vec<f64> = match detection {
            Detection::ReconThreshold => model
                .recon_errors(&params, split.test_x.view(), Some(&mut session))?
                .to_vec(),
            Detection::LatentIforest => {
                let latents = model.latents(&params, split.test_x.view(), Some(&mut session))?;
                detector.forest.score_batch(latents.view())?
            }
        };
        Ok(auroc(&scores, &split.test_label)?)
    })?;

    // The sigma = 0 row must reproduce the stored noiseless values exactly.
    if let Some(zero_row) = rows.iter().find(|r| r.sigma == 0.0) {
        for (&seed, auroc_noisy) in seeds.iter().zip(&zero_row.aurocs) {
            let stored = cells
                .iter()
                .find(|(s, _)| *s == seed)
                .map(|(_, a)| *a)
                .unwrap();
            if stored != *auroc_noisy {
                bail!(
                    "sigma=0 evaluation diverged from the stored noiseless run \
                     (seed {seed}: {auroc_noisy} vs {stored})"
                );
            }
        }
    }

    for row in &rows {
        println!(
            "sigma {:>5}: F_avg {:.6} r {:.3e} auroc {:.4} +/- {:.4}",
            row.sigma, row.f_avg, row.r, row.mean_auroc, row.std_auroc
        );
    }
    let path = write_report(&ctx.out_dir, dataset, "noise.csv", &noise_csv(&rows))?;
    println!("noise report: {}", path.display());
    Ok(())
}

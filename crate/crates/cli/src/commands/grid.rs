//! `grid`: the full architecture grid across all seeds, plus reports.

use rayon::prelude::*;

use qnad_core::models::{enumerate_grid, Family, ModelConfig};

use super::{dataset_dir, load_prepared, run_cell, save_cell_artifacts, write_latents_csv, Ctx};
use crate::commands::report::write_reports_from_store;

pub fn cmd_grid(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    let (split, _) = load_prepared(&ctx.out_dir, dataset)?;
    let template = ctx.config.template();
    let configs = enumerate_grid(&[dataset], &[Family::Classical, Family::Hqc], &template);

    let mut cells: Vec<ModelConfig> = Vec::new();
    for cfg in &configs {
        for &seed in &ctx.config.experiment.seeds {
            let mut cfg = cfg.clone();
            cfg.seed = seed;
            cells.push(cfg);
        }
    }
    println!(
        "grid on `{dataset}`: {} architectures x {} seeds = {} cells ({} workers)",
        configs.len(),
        ctx.config.experiment.seeds.len(),
        cells.len(),
        ctx.workers
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()?;
    let outcomes: Vec<(ModelConfig, anyhow::Result<_>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cfg| {
                let result = run_cell(&split, cfg, &ctx.config.detect, &ctx.config_hash)
                    .and_then(|cell| {
                        save_cell_artifacts(&ctx.out_dir, dataset, &cell)?;
                        Ok(cell)
                    });
                (cfg.clone(), result)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cfg, outcome) in outcomes {
        match outcome {
            Ok(cell) => records.extend(cell.records),
            Err(err) => failures.push(format!("{} seed {}: {err:#}", cfg.arch_id(), cfg.seed)),
        }
    }
    // Canonical order keeps the store reproducible regardless of worker
    // scheduling.
    records.sort_by(|a, b| {
        a.config_id
            .cmp(&b.config_id)
            .then(a.seed.cmp(&b.seed))
            .then(a.protocol.key().cmp(&b.protocol.key()))
    });
    let store = ctx.store(dataset);
    let (appended, skipped) = store.append(&records)?;
    println!("run store: {appended} appended, {skipped} already present");

    if !failures.is_empty() {
        let path = dataset_dir(&ctx.out_dir, dataset).join("failures.log");
        std::fs::write(&path, failures.join("\n") + "\n")?;
        eprintln!(
            "{} cell(s) failed; see {} (reports mark missing cells)",
            failures.len(),
            path.display()
        );
    }

    write_reports_from_store(ctx, dataset)?;
    dump_best_latents(ctx, dataset, &split)?;

    if failures.is_empty() {
        Ok(())
    } else {
        anyhow::bail!("{} grid cell(s) failed", failures.len())
    }
}

/// Emit raw test-set latents for the best configuration of each family so
/// the latent space can be plotted externally.
fn dump_best_latents(
    ctx: &Ctx,
    dataset: &str,
    split: &qnad_core::data::DatasetSplit,
) -> anyhow::Result<()> {
    let records = ctx.store(dataset).load()?;
    let report = qnad_core::evalstats::best_model_report(&records);
    let Some(report) = report else {
        return Ok(());
    };
    for config_id in [&report.level_a, &report.level_b] {
        let arch_id = config_id.split('+').next().unwrap_or(config_id);
        for &seed in &ctx.config.experiment.seeds {
            let path = super::model_artifact_path(&ctx.out_dir, dataset, arch_id, seed);
            if !path.exists() {
                continue;
            }
            let artifact: super::ModelArtifact = super::read_json(&path)?;
            let (model, params) = super::model_from_artifact(&artifact)?;
            let latents = model.latents(&params, split.test_x.view(), None)?;
            let out = dataset_dir(&ctx.out_dir, dataset)
                .join(format!("latents/{arch_id}_s{seed}.csv"));
            write_latents_csv(&out, &latents, split)?;
        }
    }
    Ok(())
}

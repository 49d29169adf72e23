//! `run`: train and evaluate a single model configuration.

use super::{
    dataset_dir, load_prepared, parse_selector, run_cell, save_cell_artifacts, write_latents_csv,
    Ctx,
};

pub fn cmd_run(ctx: &Ctx, dataset: &str, selector: &str, seed: u64) -> anyhow::Result<()> {
    let (split, _) = load_prepared(&ctx.out_dir, dataset)?;
    let template = ctx.config.template();
    let mut cfg = parse_selector(selector, &template, dataset)?;
    cfg.seed = seed;

    let cell = run_cell(&split, &cfg, &ctx.config.detect, &ctx.config_hash)?;
    save_cell_artifacts(&ctx.out_dir, dataset, &cell)?;
    if let Some(latents) = &cell.test_latents {
        let path = dataset_dir(&ctx.out_dir, dataset)
            .join(format!("latents/{}_s{seed}.csv", cfg.arch_id()));
        write_latents_csv(&path, latents, &split)?;
    }

    let store = ctx.store(dataset);
    let (appended, skipped) = store.append(&cell.records)?;
    for record in &cell.records {
        println!(
            "{} seed {} [{}] auroc {:.4} ({} ms)",
            record.config_id,
            record.seed,
            record.protocol.key(),
            record.auroc,
            record.wall_time_ms
        );
    }
    println!(
        "run store: {appended} appended, {skipped} already present ({})",
        store.path().display()
    );
    Ok(())
}

//! `report`: regenerate every table from the run store; never retrains.

use qnad_core::evalstats::{
    aggregate, best_model_report, comparison_csv, factor_report, interaction_csv,
    interaction_report, summary_csv,
};

use super::{write_report, Ctx};

pub fn cmd_report(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    write_reports_from_store(ctx, dataset)
}

pub fn write_reports_from_store(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    let records = ctx.store(dataset).load()?;
    if records.is_empty() {
        anyhow::bail!("run store for `{dataset}` is empty; run `qnad run` or `qnad grid` first");
    }

    let (summaries, warnings) = aggregate(&records);
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let path = write_report(&ctx.out_dir, dataset, "summary.csv", &summary_csv(&summaries))?;
    println!("summary ({} configs): {}", summaries.len(), path.display());

    let mut comparisons = Vec::new();
    if let Some(best) = best_model_report(&records) {
        println!(
            "best classical {} ({:.4}) vs best hybrid {} ({:.4}): delta {:+.4}, p {:.4}",
            best.level_b, best.mean_b, best.level_a, best.mean_a, best.test.delta, best.test.p_value
        );
        comparisons.push(best);
    }
    if !comparisons.is_empty() {
        let path = write_report(
            &ctx.out_dir,
            dataset,
            "best_model.csv",
            &comparison_csv(&comparisons),
        )?;
        println!("best-model comparison: {}", path.display());
    }

    let factors = factor_report(&records);
    if !factors.is_empty() {
        let path = write_report(&ctx.out_dir, dataset, "factors.csv", &comparison_csv(&factors))?;
        println!("design-factor analysis ({} factors): {}", factors.len(), path.display());
    }

    let cells = interaction_report(&records);
    if !cells.is_empty() {
        let path = write_report(
            &ctx.out_dir,
            dataset,
            "interaction.csv",
            &interaction_csv(&cells),
        )?;
        println!("placement x measurement interaction: {}", path.display());
    }

    Ok(())
}

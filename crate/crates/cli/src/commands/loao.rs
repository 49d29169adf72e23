//! `loao`: leave-one-attack-out protocol. The supervised baseline retrains
//! per held-out category; the unsupervised models train once on the
//! normal-only view and are re-scored on each plan's evaluation subset.

use ndarray::Axis;

use qnad_core::data::make_loao_plans;
use qnad_core::evalstats::{auroc, protocol_csv, protocol_report, Protocol, RunResult};
use qnad_core::models::{build_model, BuiltModel, Detection};
use qnad_core::nncore::train_loop;

use super::{load_prepared, parse_selector, run_cell, save_cell_artifacts, write_report, Ctx};

pub fn cmd_loao(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    let (split, _) = load_prepared(&ctx.out_dir, dataset)?;
    let plans = make_loao_plans(&split)?;
    println!(
        "loao on `{dataset}`: {} held-out categories: {}",
        plans.len(),
        plans
            .iter()
            .map(|p| p.held_out.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    let template = ctx.config.template();
    let unsup_selectors = [
        ("unsup-classical", ctx.config.loao.classical_model.as_str()),
        ("unsup-hqc", ctx.config.loao.hqc_model.as_str()),
    ];

    let mut records: Vec<RunResult> = Vec::new();
    let mut class_ids: Vec<(String, String)> = Vec::new();

    for &seed in &ctx.config.experiment.seeds {
        // Unsupervised: one training per family and seed; full-test plus
        // per-plan evaluation of the same trained model.
        for (class_name, selector) in unsup_selectors {
            let mut cfg = parse_selector(selector, &template, dataset)?;
            cfg.seed = seed;
            let cell = run_cell(&split, &cfg, &ctx.config.detect, &ctx.config_hash)?;
            save_cell_artifacts(&ctx.out_dir, dataset, &cell)?;
            let recon_record = cell
                .records
                .iter()
                .find(|r| r.detection == Detection::ReconThreshold)
                .expect("autoencoder cell emits a recon record");
            if seed == ctx.config.experiment.seeds[0] {
                class_ids.push((class_name.to_string(), recon_record.config_id.clone()));
            }
            records.push(recon_record.clone());

            let artifact = &cell.model_artifact;
            let (model, params) = super::model_from_artifact(artifact)?;
            let errors = model.recon_errors(&params, split.test_x.view(), None)?;
            for plan in &plans {
                let scores: Vec<f64> = plan.eval_rows.iter().map(|&i| errors[i]).collect();
                let labels: Vec<bool> =
                    plan.eval_rows.iter().map(|&i| split.test_label[i]).collect();
                records.push(RunResult::new(
                    &cfg,
                    Detection::ReconThreshold,
                    Protocol::Loao(plan.held_out.clone()),
                    auroc(&scores, &labels)?,
                    0,
                    &ctx.config_hash,
                ));
            }
        }

        // Supervised: full-test reference plus one retraining per plan.
        let mut sup_cfg = template.supervised_config(dataset);
        sup_cfg.seed = seed;
        sup_cfg.train.seed = seed;
        let sup_cell = run_cell(&split, &sup_cfg, &ctx.config.detect, &ctx.config_hash)?;
        save_cell_artifacts(&ctx.out_dir, dataset, &sup_cell)?;
        if seed == ctx.config.experiment.seeds[0] {
            class_ids.push((
                "supervised".to_string(),
                sup_cell.records[0].config_id.clone(),
            ));
        }
        records.extend(sup_cell.records.clone());

        for plan in &plans {
            let x = split.train_x.select(Axis(0), &plan.supervised_train_rows);
            let y: Vec<f64> = plan
                .supervised_train_rows
                .iter()
                .map(|&i| if split.train_label[i] { 1.0 } else { 0.0 })
                .collect();
            let model = match build_model(&sup_cfg, split.n_features())? {
                BuiltModel::Supervised(m) => m,
                BuiltModel::Autoencoder(_) => unreachable!("supervised config"),
            };
            let trained = train_loop(&model, x.view(), Some(&y), &sup_cfg.train)?;
            let eval_x = split.test_x.select(Axis(0), &plan.eval_rows);
            let labels: Vec<bool> =
                plan.eval_rows.iter().map(|&i| split.test_label[i]).collect();
            let proba = model.proba(&trained.params, eval_x.view())?;
            records.push(RunResult::new(
                &sup_cfg,
                Detection::ReconThreshold,
                Protocol::Loao(plan.held_out.clone()),
                auroc(proba.as_slice().unwrap(), &labels)?,
                0,
                &ctx.config_hash,
            ));
        }
    }

    let store = ctx.store(dataset);
    let (appended, skipped) = store.append(&records)?;
    println!("run store: {appended} appended, {skipped} already present");

    // Table-shaped protocol report plus the per-plan breakdown.
    let all = store.load()?;
    let classes: Vec<(&str, &str)> = class_ids
        .iter()
        .map(|(class, id)| (class.as_str(), id.as_str()))
        .collect();
    let rows = protocol_report(&all, &classes);
    let path = write_report(&ctx.out_dir, dataset, "protocol.csv", &protocol_csv(&rows))?;
    println!("protocol report: {}", path.display());

    let mut breakdown = String::from("model_class,config_id,category,seed,auroc\n");
    for (class, id) in &classes {
        for r in all.iter().filter(|r| r.config_id == *id) {
            if let Protocol::Loao(category) = &r.protocol {
                breakdown.push_str(&format!(
                    "{class},{id},{category},{},{:.6}\n",
                    r.seed, r.auroc
                ));
            }
        }
    }
    let path = write_report(&ctx.out_dir, dataset, "loao_breakdown.csv", &breakdown)?;
    println!("per-plan breakdown: {}", path.display());
    Ok(())
}

//! `prepare`: build and cache a preprocessed dataset snapshot.

use qnad_core::data::{
    make_splits, save_snapshot, synthetic_dataset, DataError, FeatureSchema, SplitPolicy,
};

use super::{snapshot_path, Ctx};
use crate::config::DatasetSection;

pub fn cmd_prepare(ctx: &Ctx, dataset: &str) -> anyhow::Result<()> {
    let section = ctx.config.dataset(dataset)?;
    let split = match section {
        DatasetSection::Synthetic {
            n_normal,
            n_anomalies,
            dim,
            gen_seed,
        } => synthetic_dataset(*gen_seed, *n_normal, *n_anomalies, *dim),
        DatasetSection::ProvidedSplit {
            schema,
            train_file,
            test_file,
        } => {
            let schema = load_schema(ctx, schema)?;
            make_splits(
                dataset,
                &schema,
                SplitPolicy::Provided {
                    train: &ctx.config.resolve(train_file),
                    test: &ctx.config.resolve(test_file),
                },
                0,
            )?
        }
        DatasetSection::SampleFraction {
            schema,
            files,
            fraction,
            exclude,
            sample_seed,
        } => {
            let schema = load_schema(ctx, schema)?;
            let resolved: Vec<std::path::PathBuf> =
                files.iter().map(|f| ctx.config.resolve(f)).collect();
            make_splits(
                dataset,
                &schema,
                SplitPolicy::SampleFraction {
                    files: resolved.iter().map(|p| p.as_path()).collect(),
                    fraction: *fraction,
                    exclude_pattern: exclude.as_deref(),
                },
                *sample_seed,
            )?
        }
    };

    let path = snapshot_path(&ctx.out_dir, dataset);
    let digest = save_snapshot(&path, &split, &ctx.config_hash)?;
    println!("{}", split.summary());
    println!(
        "snapshot written to {} (content hash {})",
        path.display(),
        &digest[..12]
    );
    Ok(())
}

fn load_schema(ctx: &Ctx, path: &std::path::Path) -> anyhow::Result<FeatureSchema> {
    let resolved = ctx.config.resolve(path);
    let text = std::fs::read_to_string(&resolved).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(resolved.clone())
        } else {
            DataError::Io {
                path: resolved.clone(),
                source,
            }
        }
    })?;
    Ok(FeatureSchema::from_toml(&text)?)
}

//! Experiment driver for quantum-hybrid network anomaly detection: dataset
//! preparation, single runs, grid runs, leave-one-attack-out protocol,
//! noise sweeps, and report generation.

pub mod commands;
pub mod config;
pub mod store;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "qnad", about = "Quantum-hybrid autoencoders for network anomaly detection", version)]
pub struct Cli {
    /// Experiment config file (TOML).
    #[arg(long, global = true, default_value = "qnad.toml")]
    pub config: PathBuf,
    /// Output directory override (also via QNAD_OUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker-pool width for grid and loao cells.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Preprocess a dataset and cache the snapshot.
    Prepare {
        #[arg(long)]
        dataset: String,
    },
    /// Train and evaluate a single model configuration.
    Run {
        #[arg(long)]
        dataset: String,
        /// Architecture selector, e.g. cls-ae or hqc-early-expval-vae-reg.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full architecture grid over all seeds and write reports.
    Grid {
        #[arg(long)]
        dataset: String,
    },
    /// Leave-one-attack-out protocol (supervised + both unsupervised families).
    Loao {
        #[arg(long)]
        dataset: String,
    },
    /// Coherent gate-noise sweep over the best hybrid model.
    Noise {
        #[arg(long)]
        dataset: String,
    },
    /// Regenerate reports from the run store without retraining.
    Report {
        #[arg(long)]
        dataset: String,
    },
}

/// Error category used for the process exit code.
pub fn error_category(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.downcast_ref::<config::ConfigFileError>().is_some()
            || cause.downcast_ref::<qnad_core::models::ConfigError>().is_some()
        {
            return ("config", 2);
        }
        if cause.downcast_ref::<qnad_core::data::DataError>().is_some() {
            return ("data", 3);
        }
        if cause.downcast_ref::<qnad_core::nncore::NnError>().is_some() {
            return ("training", 4);
        }
        if cause.downcast_ref::<qnad_core::evalstats::StatsError>().is_some()
            || cause.downcast_ref::<qnad_core::anomaly::AnomalyError>().is_some()
        {
            return ("evaluation", 5);
        }
    }
    ("runtime", 1)
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    let config = ExperimentConfig::load(&cli.config)?;
    let ctx = Ctx::new(config, cli.out.as_deref(), cli.workers);
    match &cli.command {
        Command::Prepare { dataset } => commands::prepare::cmd_prepare(&ctx, dataset),
        Command::Run {
            dataset,
            model,
            seed,
        } => commands::run::cmd_run(&ctx, dataset, model, *seed),
        Command::Grid { dataset } => commands::grid::cmd_grid(&ctx, dataset),
        Command::Loao { dataset } => commands::loao::cmd_loao(&ctx, dataset),
        Command::Noise { dataset } => commands::noise::cmd_noise(&ctx, dataset),
        Command::Report { dataset } => commands::report::cmd_report(&ctx, dataset),
    }
}

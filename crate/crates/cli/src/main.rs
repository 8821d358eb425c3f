use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

mod config;
mod experiments;
mod failure;
mod output;

use config::{Experiment, ExperimentConfig};
use failure::Failure;
use output::RunInfo;

/// Run a supersymmetric quantum mechanics experiment from a JSON config.
#[derive(Parser)]
#[command(name = "susyqm", version)]
struct Cli {
    /// Experiment to run; must match the config's `experiment` field.
    experiment: Experiment,
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `optimizer.overrides.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

/// Size the global rayon pool from SUSYQM_THREADS when it is set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SUSYQM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("SUSYQM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Io(e.into()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let bytes = fs::read(&cli.config).with_context(|| format!("reading {}", cli.config.display())).map_err(|e| {
        Failure::Validation { code: "cli.config".into(), message: format!("{e:#}") }
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Failure::config(format!("config is not UTF-8: {e}")))?;
    let cfg = ExperimentConfig::parse(text)?;
    if cfg.experiment != cli.experiment {
        return Err(Failure::config(format!(
            "command asks for {} but the config describes {}",
            cli.experiment, cfg.experiment
        )));
    }
    let artifacts = experiments::run(&cfg, cli.seed)?;
    let dir = cli.out.unwrap_or_else(|| cfg.outputs.directory.clone());
    let seed = match cfg.experiment {
        Experiment::DoubleWell => Some(cfg.optimizer.config(cli.seed)?.seed),
        _ => None,
    };
    output::write_all(&dir, &artifacts, &RunInfo { experiment: cfg.experiment.to_string(), config_bytes: &bytes, seed })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

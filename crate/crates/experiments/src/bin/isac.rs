use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use isac_experiments::output::write_outputs;
use isac_experiments::{run_with_threads, ExperimentConfig};

/// Bayesian-FIM ISAC precoder experiments.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Objective and gradient-norm convergence for several sample counts.
    Convergence(RunArgs),
    /// Sensing/communication trade-off over an α sweep.
    Tradeoff(RunArgs),
    /// Analytic vs finite-difference gradient check.
    Gradcheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `base_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(name: &str, args: RunArgs) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment.name() != name {
        bail!(
            "{} describes a {} experiment, not {name}",
            args.config.display(),
            cfg.experiment.name()
        );
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    let started = Instant::now();
    let record = run_with_threads(&cfg, args.threads)?;
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let dir = write_outputs(&record, &cfg, &cfg.output_dir, args.threads, total_ms)?;
    for f in &record.failures {
        eprintln!("run failed: {f}");
    }
    if record.threshold_breached {
        eprintln!("gradient check exceeded the relative-error threshold");
    }
    println!("{}", dir.display());
    Ok(record.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Convergence(a) => ("convergence", a),
        Command::Tradeoff(a) => ("tradeoff", a),
        Command::Gradcheck(a) => ("gradcheck", a),
    };
    match execute(name, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

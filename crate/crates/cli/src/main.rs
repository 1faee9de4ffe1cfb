use std::path::PathBuf;
use std::process::ExitCode;

use antifrag_core::harness::{run_sweep_with_jobs, summary, to_csv, ExperimentConfig};
use antifrag_core::Error;
use clap::Parser;

/// Sweeps JSR over jammer models and RIS sizes and writes one CSV row per
/// grid point.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// TOML experiment file
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Overrides `experiment.seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.trials`
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; the output does not depend on it
    #[arg(long)]
    jobs: Option<usize>,
    /// Print crossovers and the largest gain to stdout
    #[arg(long)]
    summary: bool,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;

fn load(args: &Args) -> Result<ExperimentConfig, (u8, String)> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.experiment.trials = trials;
    }
    cfg.validate().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if args.jobs == Some(0) {
        return Err((EXIT_CONFIG, "--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), (u8, String)> {
    let cfg = load(args)?;
    log::info!(
        "{} jammer(s) x {} RIS size(s) x {} JSR point(s), {} trials each",
        cfg.experiment.jammer_models.len(),
        cfg.experiment.ris_sizes.len(),
        cfg.experiment.jsr_grid_db.len(),
        cfg.experiment.trials
    );
    let rows = run_sweep_with_jobs(&cfg, args.jobs).map_err(|e| match e {
        Error::Config(_) => (EXIT_CONFIG, e.to_string()),
        Error::Io(_) => (EXIT_IO, e.to_string()),
        other => (EXIT_CONFIG, other.to_string()),
    })?;
    std::fs::write(&args.out, to_csv(&rows))
        .map_err(|e| (EXIT_IO, format!("cannot write {}: {e}", args.out.display())))?;
    log::info!("wrote {} rows to {}", rows.len(), args.out.display());
    if args.summary {
        print!("{}", summary(&rows));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("simulate: {msg}");
            ExitCode::from(code)
        }
    }
}

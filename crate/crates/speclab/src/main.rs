use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use speclab::{load_config, run, ConfigError, Experiment, RunError};

/// Run one speclab experiment and write its outputs and manifest.
#[derive(Debug, Parser)]
#[command(name = "speclab", version)]
struct Args {
    experiment: Experiment,
    /// TOML configuration, or the manifest.json of an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `out` in the configuration, then
    /// `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn execute(args: Args) -> Result<(), RunError> {
    let mut cfg = load_config(&args.config, args.experiment)?;
    if let Some(seed) = args.seed {
        if seed > i64::MAX as u64 {
            return Err(ConfigError {
                source: "--seed".into(),
                line: None,
                field: Some("seed".into()),
                message: format!("must be at most {}, got {seed}", i64::MAX),
            }
            .into());
        }
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(args.experiment.name()));
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = run(args.experiment, &cfg, &out, jobs)?;
    println!(
        "{}: {} files in {} (config sha256 {})",
        manifest.experiment,
        manifest.outputs.len(),
        out.display(),
        manifest.config_sha256
    );
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("speclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

/// Seeded, parallel experiments on glider automata: entry-time statistics,
/// factor checks, walk-minima comparisons and space-time diagrams.
#[derive(Parser)]
#[command(name = "gliders", version)]
struct Args {
    /// Experiment description file (one [command] section)
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: the config's value, else all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for CSV and diagram files (default: the config's value,
    /// else the current directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run_main(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_main(args: Args) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = config::parse_config(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = Some(workers);
    }
    if let Some(out) = args.out {
        config.out = Some(out.display().to_string());
    }
    let outcome = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("building the worker pool")?
            .install(|| run::run(&config)),
        None => run::run(&config),
    }?;
    Ok(outcome.exit_code)
}

//! `nematic`: run nematic flow experiments and write CSV diagnostics.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 assumption or criterion failure.

mod commands;
mod config;
mod setup;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use nematic_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nematic", version, about = "Nematic liquid-crystal flow experiments")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory; write the archive and `audit.csv`.
    Simulate,
    /// Certify the assumptions on the potential; write `assumptions.csv`.
    CheckPotential,
    /// Energy audit of an archive (or of a fresh run); write `audit.csv`.
    Audit {
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Fit the energy decay rate; write `decay_fit.csv`.
    DecayFit {
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Attraction curve of a random ensemble; write `attract.csv`.
    Attract,
    /// Residual refinement study over `dts`; write `convergence.csv`.
    Convergence,
}

fn execute(cli: &Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out.as_path();
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg, out),
        Command::CheckPotential => commands::check_potential(&cfg, out),
        Command::Audit { archive } => commands::audit(&cfg, out, archive.as_deref()),
        Command::DecayFit { archive } => commands::decay_fit(&cfg, out, archive.as_deref()),
        Command::Attract => commands::attract(&cfg, out),
        Command::Convergence => commands::convergence(&cfg, out),
    }
}

/// Solver errors map to 2, everything else to 1.
fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NoConvergence { .. }
            | Error::Cfl { .. }
            | Error::Blowup { .. }
            | Error::NonFinite { .. }
            | Error::PotentialNotFinite { .. },
        ) => commands::SOLVER_FAILURE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}

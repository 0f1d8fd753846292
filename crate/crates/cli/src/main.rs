//! `dysenv` command-line front end.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Emitted, Overrides};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "dysenv",
    version,
    about = "Davis-Yin splitting, its envelope, and strict-saddle experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the config seed; echoed in every report.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for artifacts (reports, CSV files).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for saddle-mc.
    #[arg(long, global = true, value_name = "K")]
    workers: Option<usize>,

    /// Evaluate the smooth-part gradient at z instead of at prox_{gamma g}(z).
    #[arg(long, global = true)]
    q_at_z: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the splitting from the configured start point.
    Solve,
    /// Evaluate the envelope, its gradient and metric at the configured points.
    Envelope,
    /// Run the invariant suite; exits 4 if any check fails.
    Check,
    /// Monte-Carlo runs from random starts, labeled by attractor.
    SaddleMc,
    /// Step-size bounds and the Jacobian lower bound.
    Bounds,
}

fn run(cli: &Cli) -> CliResult<Emitted> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::schema("--config", "a config file is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg = config::parse_config(&text)?;
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        workers: cli.workers,
        q_at_z: cli.q_at_z,
    };
    match cli.command {
        Command::Solve => commands::solve(&cfg, &overrides),
        Command::Envelope => commands::envelope(&cfg, &overrides),
        Command::Check => commands::check(&cfg, &overrides),
        Command::SaddleMc => commands::saddle_mc(&cfg, &overrides),
        Command::Bounds => commands::bounds(&cfg, &overrides),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Emitted { json, exit_code }) => {
            println!("{json}");
            ExitCode::from(exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

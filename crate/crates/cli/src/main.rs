//! `frankfit`: sample, fit and study the Frank copula from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 estimation failure.

mod commands;
mod config;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{CliResult, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "frankfit", version, about = "Frank copula sampling, estimation and simulation studies")]
struct Cli {
    /// File of `key = value` settings (`#` starts a comment). Keys are the
    /// long flag names; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a sample and write it as `u1,u2` CSV.
    Generate(commands::GenerateArgs),
    /// Fit θ to a two-column dataset by ML and the two moment methods.
    Estimate(commands::EstimateArgs),
    /// Run the bias/MSE simulation over a grid of sample sizes and θ.
    Simulate(commands::SimulateArgs),
    /// Tabulate the Fisher information per observation.
    Fisher(commands::FisherArgs),
    /// Evaluate the log-likelihood or H(θ) of a dataset over a θ grid.
    Scan(commands::ScanArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Generate(a) => commands::generate(a, file),
        Command::Estimate(a) => commands::estimate(a, file),
        Command::Simulate(a) => commands::simulate(a, file),
        Command::Fisher(a) => commands::fisher(a, file),
        Command::Scan(a) => commands::scan(a, file),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("frankfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

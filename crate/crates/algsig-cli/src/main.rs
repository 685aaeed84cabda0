//! `algsig`: density checks, operator tables, fractional derivatives, bound
//! certificates and rate sweeps.
//!
//! Exit status: 0 success, 2 hypothesis violated, 3 verification failure,
//! 4 I/O error, 5 configuration error.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Settings, SweepConfig, DEFAULT_LADDER};
use crate::error::{Result, Status};

#[derive(Debug, Parser)]
#[command(name = "algsig", version, about = "Quasi-interpolation with algebraic sigmoid densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition-of-unity, tail, denominator and endpoint checks per (m, n, alpha).
    DensityCheck(Settings),
    /// Table of x, f(x), the operator value, the error norm and the denominator.
    Approx(Settings),
    /// Table of one-sided Caputo derivatives with closed-form oracles where known.
    Fractional(Settings),
    /// Bound reports for the selected theorems; exits 0 iff every certified report passes.
    Certify(Settings),
    /// Error ladders over n with fitted slopes and predicted regimes.
    Sweep(Settings),
}

fn run(command: Command) -> Result<Status> {
    let (settings, ladder): (Settings, &[u64]) = match &command {
        Command::Sweep(s) => (s.clone(), &DEFAULT_LADDER),
        Command::DensityCheck(s) | Command::Approx(s) | Command::Fractional(s) | Command::Certify(s) => {
            (s.clone(), &[100])
        }
    };
    let cfg = SweepConfig::resolve(settings.load()?, ladder)?;
    let outcome = match command {
        Command::DensityCheck(_) => commands::run_density_check(&cfg)?,
        Command::Approx(_) => commands::run_approx(&cfg)?,
        Command::Fractional(_) => commands::run_fractional(&cfg)?,
        Command::Certify(_) => commands::run_certify(&cfg)?,
        Command::Sweep(_) => commands::run_sweep(&cfg)?,
    };
    outcome.artifact.write(&cfg)?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Config } else { Status::Success }.into();
        }
    };
    match run(cli.command) {
        Ok(status) => {
            if status != Status::Success {
                eprintln!("algsig: finished with status {}", status as u8);
            }
            status.into()
        }
        Err(e) => {
            eprintln!("algsig: {e}");
            e.status().into()
        }
    }
}

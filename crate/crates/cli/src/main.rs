//! `assurekit` command-line front end.

mod assure;
mod calibrate;
mod check;
mod error;
mod io;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::Exit;

/// Model checking, simulation and cross-technique reconciliation for
/// guarded-command DTMC models.
#[derive(Debug, Parser)]
#[command(name = "assurekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check properties against a model.
    Check(check::CheckArgs),
    /// Run a seeded simulation campaign.
    Simulate(simulate::SimulateArgs),
    /// Produce assurances from every technique and compare them.
    Assure(assure::AssureArgs),
    /// Derive model constants from experiment counts.
    Calibrate(calibrate::CalibrateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Input } else { Exit::Ok };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Check(a) => check::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Assure(a) => assure::run(a),
        Command::Calibrate(a) => calibrate::run(a),
    };
    match result {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}

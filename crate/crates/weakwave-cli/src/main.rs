//! `weakwave`: reproduce weak-measurement figure data and experiments from
//! the command line.
//!
//! Subcommands emit CSV tables (detector densities, angle sweeps,
//! conditioned averages, Bohmian streamlines) or JSON reports (displacement
//! estimation, state reconstruction) into an output directory. Every run is
//! deterministic given its configuration and seed, independent of the
//! worker count.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("weakwave: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

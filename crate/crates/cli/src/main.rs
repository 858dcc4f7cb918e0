//! Command-line driver for the rotationally symmetric List flow solver.
//!
//! Exit codes: 0 completed; 10 minimal-sphere signal; 11 non-finite state;
//! 12 CFL collapse; 13 fatal monitor violation; 2 configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod tabulated;

#[derive(Parser)]
#[command(name = "listflow", version, about = "Rotationally symmetric List flow in the area-radius gauge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration; writes series.csv, snapshots/, history.csv and run.meta
    Run {
        /// TOML configuration file
        config: PathBuf,
    },
    /// Build the initial data and report bound constants and decay fits (no evolution)
    Check {
        config: PathBuf,
    },
    /// Run the same physics at nested resolutions and report observed orders
    Converge {
        config: PathBuf,
        /// Comma-separated interval counts, each double the previous (>= 3)
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
    },
    /// Scan a finished run for essential blow-up candidates and write rescaled profiles
    Rescale {
        /// Output directory of a `run` invocation
        run_dir: PathBuf,
        /// Dominance constant of the blow-up scan (>= 1)
        #[arg(long, default_value_t = 2.0)]
        c: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => commands::run::run(&config),
        Command::Check { config } => commands::check::check(&config),
        Command::Converge { config, levels } => commands::converge::converge(&config, &levels),
        Command::Rescale { run_dir, c } => commands::rescale::rescale_cmd(&run_dir, c),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! `gwp`: simulate, verify and cross-check Gaussian wave packet dynamics.
//!
//! Exit codes: 0 success, 1 failed verification or threshold, 2 invalid
//! configuration or arguments, 3 numerical failure during a run.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gwp_core::verify::Suite;

use config::LoadedConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure{}: {message}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Numerical { step: Option<usize>, message: String },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gwp", version, about = "Gaussian wave packets as Hamiltonian flow on the symplectic frame bundle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the configured initial state; write trajectory CSV and diagnostics JSON.
    Simulate { config: PathBuf },
    /// Run a seeded property suite (core, reduction, dynamics, oracle or all).
    ///
    /// Tolerances can be overridden per property with GWP_TOL_<PROPERTY>=<value>.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Evaluate both parametrizations on the grid at the given times.
    Wavefunction {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        times: Vec<f64>,
    },
    /// Compare the packet against a Crank–Nicolson solution of the Schrödinger equation.
    Oracle { config: PathBuf },
    /// Run `simulate` for several configs, in parallel by default.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "manifest.json")]
        manifest: PathBuf,
        #[arg(long)]
        sequential: bool,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { config } => {
            println!("{}", commands::simulate(&LoadedConfig::load(&config)?)?);
            Ok(0)
        }
        Command::Verify { suite, seed, samples } => {
            let overrides = commands::tolerance_overrides(std::env::vars())?;
            let (table, pass) = commands::verify(suite, seed, samples, &overrides)?;
            print!("{table}");
            Ok(if pass { 0 } else { 1 })
        }
        Command::Wavefunction { config, times } => {
            println!("{}", commands::wavefunction(&LoadedConfig::load(&config)?, &times)?);
            Ok(0)
        }
        Command::Oracle { config } => {
            let (line, pass) = commands::oracle(&LoadedConfig::load(&config)?)?;
            println!("{line}");
            Ok(if pass { 0 } else { 1 })
        }
        Command::Sweep { configs, manifest, sequential } => {
            let (line, code) = commands::sweep(&configs, &manifest, sequential)?;
            println!("{line}");
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

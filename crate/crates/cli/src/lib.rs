//! Command-line driver for the `phasecat` simulation library.
//!
//! Each subcommand writes one table (CSV by default, or JSON) whose first
//! line echoes the fully resolved configuration.

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod expr;
pub mod output;
pub mod validate;

use config::{RunConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numeric(#[from] phasecat::Error),
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Input(_) | CliError::Numeric(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phasecat", version, about = "Entangled cat-state Bell tests with homodyne postselection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// |ψ_k(x₁, x₂)|² on a square grid.
    Wavefunction(Settings),
    /// P(|0101⟩) and P/P_max against σ₁ for each σ₂.
    Fringe(Settings),
    /// |S| over a grid of (σ′_A, σ′_B) at fixed σ_A, σ_B.
    ChshMap(Settings),
    /// Optimized |S| against N for several window widths.
    ChshMax(Settings),
    /// Optimized |S| against the mean photon loss.
    LossSweep(Settings),
    /// Run the numerical self-checks and print a pass/fail table.
    Validate(Settings),
}

impl Command {
    fn parts(self) -> (&'static str, Settings) {
        match self {
            Command::Wavefunction(s) => ("wavefunction", s),
            Command::Fringe(s) => ("fringe", s),
            Command::ChshMap(s) => ("chsh-map", s),
            Command::ChshMax(s) => ("chsh-max", s),
            Command::LossSweep(s) => ("loss-sweep", s),
            Command::Validate(s) => ("validate", s),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (name, settings) = cli.command.parts();
    let config = RunConfig::resolve(name, settings.layered()?)?;
    if let Some(threads) = config.threads {
        // fails only if a pool already exists, which a single invocation never has
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let table = match name {
        "wavefunction" => commands::wavefunction(&config)?,
        "fringe" => commands::fringe_curves(&config)?,
        "chsh-map" => commands::chsh_map_table(&config)?,
        "chsh-max" => commands::chsh_max(&config)?,
        "loss-sweep" => commands::loss_sweep(&config)?,
        _ => {
            let results = validate::run_checks();
            print!("{}", validate::report(&results));
            let failed = results.iter().filter(|r| !r.passed()).count();
            return if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Validation { failed })
            };
        }
    };
    output::emit(&config, &table)
}

//! `graphsq`: experiment harness for JSQ(d) load balancing on graphs.

mod commands;
mod config;
mod csvio;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Usage/config problems exit with 2, runtime/model failures with 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "graphsq",
    version,
    about = "Simulation and numerical experiments for JSQ(d) load balancing on graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph, write its edge list, and print a regularity report
    Graphgen(commands::graphgen::Args),
    /// Validate an edge-list file and print its regularity report
    CheckGraph(commands::checkgraph::Args),
    /// Simulate the N-server system and export occupancy series
    Simulate(commands::simulate::Args),
    /// Integrate the mean-field occupancy ODE and export the fixed point
    Ode(commands::ode::Args),
    /// Compare simulated occupancy against the ODE limit across families
    Compare(commands::compare::Args),
    /// Coupled rate sweep over system sizes
    Couple(commands::couple::Args),
    /// Covariance of tagged queue functionals across replications
    Chaos(commands::chaos::Args),
    /// Group per-cell CSV outputs into mean/stderr tables
    Summarize(commands::summarize::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graphgen(a) => commands::graphgen::run(a),
        Command::CheckGraph(a) => commands::checkgraph::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Ode(a) => commands::ode::run(a),
        Command::Compare(a) => commands::compare::run(a),
        Command::Couple(a) => commands::couple::run(a),
        Command::Chaos(a) => commands::chaos::run(a),
        Command::Summarize(a) => commands::summarize::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

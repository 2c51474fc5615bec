//! `gps`: run graph priority sampling over an edge-list file.

mod config;
mod estimate;
mod input;
mod verify;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gps_core::GpsError;

use config::{EstimateArgs, OracleArgs, VerifyArgs};

#[derive(Parser)]
#[command(name = "gps", version, about = "Graph priority sampling: triangle, wedge and clustering estimates from an edge stream")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream the input once through a fixed-size reservoir and report estimates.
    Estimate(EstimateArgs),
    /// Repeat seeded runs and check the estimators against exact counts.
    Verify(VerifyArgs),
    /// Exact triangle and wedge counts of the input.
    Oracle(OracleArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    CheckFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::CheckFailed => write!(f, "verification failed"),
        }
    }
}

impl From<GpsError> for CliError {
    fn from(e: GpsError) -> Self {
        match e {
            GpsError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Oracle(a) => input::oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gps: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

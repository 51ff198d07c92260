//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 regime or
//! domain error, 3 partial numerical failure.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Domain(Error),
    Partial(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Partial(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Domain(e) => write!(f, "domain error: {e}"),
            Failure::Partial(m) => write!(f, "partial failure: {m}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Config(anyhow::anyhow!(e)),
            Error::IncompleteScan { .. } | Error::NoConvergence { .. } | Error::GridTooCoarse(_) => {
                Failure::Partial(e.to_string())
            }
            other => Failure::Domain(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "plasmon", version, about = "Plasmon resonances of negative-index cavities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Configuration file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory; overrides OUTPUT_DIR and the config.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(short = 'j', long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the transmission regime.
    Classify(Common),
    /// Find disk resonances in the scan window.
    Solve(Common),
    /// Compare the exact resonance count with the phase-space prediction.
    Count(Common),
    /// Tabulate principal, corrected and exact quasi-eigenvalues.
    Disp(Common),
    /// Synthesize a resonant state and its localization diagnostics.
    Field(Common),
    /// Run the embedded invariant checks.
    Selftest,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Classify(c) => commands::classify(c),
        Command::Solve(c) => commands::solve(c),
        Command::Count(c) => commands::count(c),
        Command::Disp(c) => commands::disp(c),
        Command::Field(c) => commands::field(c),
        Command::Selftest => commands::selftest(),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("plasmon: {f}");
            f.exit_code()
        }
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration, 3 I/O, 4 integrity, 5 numeric.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{build_report, Context, Report};
pub use config::RunConfig;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Integrity(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "geospec", version, about = "Closed-geodesic spectra of compact hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Geodesic table file; defaults to `<out>/table.geos`.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; also read from GEOSPEC_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Enumerate closed geodesics up to the cutoff and save the table.
    Enumerate,
    /// Pressure, critical exponent and stable norm estimates.
    Pressure,
    /// Spectral-gap bounds from the pressure estimates.
    Bounds,
    /// Trace-formula geometric sums and Gaussian averages.
    TraceSum,
    /// Truncated twisted zeta values.
    Zeta,
    /// Everything above as one JSON report with CSV plot data.
    Report,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let threads = config::resolve_threads(cli.threads, cfg.threads)?;
    let ctx = Context::new(cfg, cli.table.as_deref(), cli.out.as_deref())?;
    let go = || -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match cli.command {
            Command::Enumerate => commands::cmd_enumerate(&ctx, &mut buf).map(drop),
            Command::Pressure => commands::cmd_pressure(&ctx, &mut buf).map(drop),
            Command::Bounds => commands::cmd_bounds(&ctx, &mut buf).map(drop),
            Command::TraceSum => commands::cmd_trace_sum(&ctx, &mut buf).map(drop),
            Command::Zeta => commands::cmd_zeta(&ctx, &mut buf).map(drop),
            Command::Report => commands::cmd_report(&ctx, &mut buf).map(drop),
        }?;
        Ok(buf)
    };
    let text = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(go),
        None => go(),
    }?;
    out.write_all(&text).map_err(|e| CliError::Io(e.to_string()))
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main_exit() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("geospec: {e}");
            e.exit_code()
        }
    }
}

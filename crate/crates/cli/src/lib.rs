//! Command-line driver: JSON configs in, CSV tables and JSON reports out.

pub mod commands;
pub mod config;
pub mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] borel_flow::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed table {path}: {msg}")]
    Table { path: PathBuf, msg: String },
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// 0 success, 2 config error, 3 numerical failure, 4 validity-region violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(e) if e.is_validity() => 4,
            CliError::Numerical(e) if e.is_input() => 2,
            CliError::Numerical(_) | CliError::VerifyFailed(_) => 3,
            CliError::Io { .. } | CliError::Table { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "borel-flow", version, about = "Borel-plane solver for Boussinesq and magnetic Benard flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; the built-in heat example when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Taylor order, overriding the config.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Borel-plane extent, overriding the config.
    #[arg(long, global = true)]
    pub p_max: Option<f64>,
    /// Also integrate with RK4 and report the deviation (reconstruct only).
    #[arg(long, global = true)]
    pub compare_oracle: bool,
    /// Worker threads; BOREL_FLOW_WORKERS takes precedence.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Taylor coefficients and radius report.
    Series,
    /// Borel-plane march and integral-equation residual.
    March,
    /// Laplace reconstruction in time.
    Reconstruct,
    /// A-priori and improved growth estimates.
    Estimate,
    /// Kernel and norm invariant checks.
    Verify,
    /// Runge-Kutta trajectory only.
    Oracle,
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("BOREL_FLOW_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("BOREL_FLOW_WORKERS: expected a positive integer, got {v:?}"))),
        Err(_) => match flag {
            Some(0) => Err(CliError::Config("--workers: must be positive".into())),
            other => Ok(other),
        },
    }
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = worker_count(cli.workers)? {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.order {
        cfg.order = o;
    }
    if let Some(p) = cli.p_max {
        cfg.grid.p_max = p;
    }
    if let Some(d) = &cli.out {
        cfg.output.dir = d.clone();
    }
    let opts = commands::Options { compare_oracle: cli.compare_oracle };
    commands::dispatch(cli.command, &cfg, &opts)
}

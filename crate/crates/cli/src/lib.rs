//! Batch experiment driver for `xlim-core`: threshold tables,
//! finite-length sweeps, witness and R-process studies, FKG checks and
//! expansion exponents, written as CSV (canonical) or JSON.
//!
//! Every run is a function of its [`ExperimentConfig`] and master seed;
//! parallel work is collected in index order, so the bytes written do not
//! depend on the number of worker threads.

pub mod commands;
pub mod config;
pub mod output;
pub mod stats;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser};

pub use commands::{execute, CommandKind};
pub use config::ExperimentConfig;
pub use output::{Format, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parameter error: {0}")]
    Parameter(String),
}

#[derive(Debug, Parser)]
#[command(name = "xlim", version, about = "LDPC threshold and finite-length experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Shannon, GalB and LGalB (or other DE) thresholds per (l, r).
    Thresholds(Invocation),
    /// Finite-length decoding runs with trailing-window error estimates.
    Sweep(Invocation),
    /// Witness sizes against the witness DE envelope; dump and replay.
    Witness(Invocation),
    /// R-process tails, strategy domination and birth-death tails.
    Rprocess(Invocation),
    /// Exhaustive FKG checks on random monotone pairs.
    Fkg(Invocation),
    /// Expansion exponents and exhaustive expander checks.
    Expansion(Invocation),
}

#[derive(Debug, Clone, Args)]
pub struct Invocation {
    /// TOML file with the same keys as the flags; its values win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ExperimentConfig,
}

impl Command {
    pub fn split(self) -> (CommandKind, Invocation) {
        match self {
            Command::Thresholds(i) => (CommandKind::Thresholds, i),
            Command::Sweep(i) => (CommandKind::Sweep, i),
            Command::Witness(i) => (CommandKind::Witness, i),
            Command::Rprocess(i) => (CommandKind::Rprocess, i),
            Command::Fkg(i) => (CommandKind::Fkg, i),
            Command::Expansion(i) => (CommandKind::Expansion, i),
        }
    }
}

impl Invocation {
    /// Flags overlaid with the config file, if any.
    pub fn resolve(self) -> anyhow::Result<ExperimentConfig> {
        match &self.config {
            Some(path) => Ok(self.flags.overlay(ExperimentConfig::load(path)?)),
            None => Ok(self.flags),
        }
    }
}

/// Run `kind` on a pool of `cfg.threads` workers (all cores by default).
pub fn run(kind: CommandKind, cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    match cfg.threads {
        Some(0) => Err(CliError::Parameter("--threads must be positive".into()).into()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building worker pool")?
            .install(|| execute(kind, cfg)),
        None => execute(kind, cfg),
    }
}

/// Whether an error stems from bad user input.
pub fn is_parameter_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<CliError>().is_some()
            || matches!(
                e.downcast_ref::<xlim_core::Error>(),
                Some(xlim_core::Error::Parameter(_) | xlim_core::Error::Domain(_) | xlim_core::Error::Unsupported(_))
            )
    })
}

//! Subcommand implementations. Each returns a [`Report`]; none of them
//! write files except `witness --dump`.

mod expansion;
mod fkg;
mod rprocess;
mod sweep;
mod thresholds;
mod witness;

pub use expansion::cmd_expansion;
pub use fkg::cmd_fkg;
pub use rprocess::{cmd_rprocess, default_bd_grid};
pub use sweep::cmd_sweep;
pub use thresholds::{cmd_thresholds, default_threshold_rows};
pub use witness::cmd_witness;

use clap::Subcommand;
use xlim_core::{Channel, DecoderSpec};

use crate::config::ExperimentConfig;
use crate::output::{Cell, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Shannon, GalB and LGalB (or other DE) thresholds per (l, r).
    Thresholds,
    /// Finite-length decoding runs with trailing-window error estimates.
    Sweep,
    /// Witness sizes against the witness DE envelope.
    Witness,
    /// R-process tails, strategy domination and birth-death tails.
    Rprocess,
    /// Exhaustive FKG checks on random monotone pairs.
    Fkg,
    /// Expansion exponents and exhaustive expander checks.
    Expansion,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thresholds => "thresholds",
            Self::Sweep => "sweep",
            Self::Witness => "witness",
            Self::Rprocess => "rprocess",
            Self::Fkg => "fkg",
            Self::Expansion => "expansion",
        }
    }
}

/// Run one subcommand on the current rayon pool.
pub fn execute(kind: CommandKind, cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    match kind {
        CommandKind::Thresholds => cmd_thresholds(cfg),
        CommandKind::Sweep => cmd_sweep(cfg),
        CommandKind::Witness => cmd_witness(cfg),
        CommandKind::Rprocess => cmd_rprocess(cfg),
        CommandKind::Fkg => cmd_fkg(cfg),
        CommandKind::Expansion => cmd_expansion(cfg),
    }
}

pub(crate) fn bad(msg: impl Into<String>) -> anyhow::Error {
    CliError::Parameter(msg.into()).into()
}

/// The single value of a list option, or `default` when absent.
pub(crate) fn single<T: Copy + std::fmt::Debug>(v: &Option<Vec<T>>, name: &str, default: T) -> anyhow::Result<T> {
    match v.as_deref() {
        None => Ok(default),
        Some([x]) => Ok(*x),
        Some(xs) => Err(bad(format!("--{name} takes one value here, got {xs:?}"))),
    }
}

pub(crate) fn list<T: Clone>(v: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    v.clone().unwrap_or_else(|| default.to_vec())
}

pub(crate) fn positive(v: usize, name: &str) -> anyhow::Result<usize> {
    if v == 0 {
        return Err(bad(format!("--{name} must be positive")));
    }
    Ok(v)
}

pub(crate) fn decoder(cfg: &ExperimentConfig, default: &str) -> anyhow::Result<DecoderSpec> {
    let names = list(&cfg.decoder, &[default.to_string()]);
    match names.as_slice() {
        [one] => Ok(DecoderSpec::parse(one)?),
        _ => Err(bad(format!("--decoder takes one value here, got {names:?}"))),
    }
}

pub(crate) fn channel(cfg: &ExperimentConfig, spec: &DecoderSpec) -> anyhow::Result<Channel> {
    match &cfg.channel {
        Some(c) => Ok(c.parse()?),
        None => Ok(spec.channel()),
    }
}

pub(crate) fn check_eps(eps: &[f64]) -> anyhow::Result<()> {
    if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(bad(format!("eps = {e} is not in [0, 1]")));
    }
    Ok(())
}

/// `value, lo, hi` for a deterministic quantity.
pub(crate) fn exact(v: f64) -> [Cell; 3] {
    [v.into(), v.into(), v.into()]
}

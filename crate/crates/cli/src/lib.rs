//! Command-line front end for `shardsec-core`.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numeric domain
//! error, 4 I/O error.

pub mod commands;
pub mod format;
pub mod reference;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use shardsec_core::params::{ConfigError, RawConfig, Violation};
use shardsec_core::{Mode, NetworkConfig};

pub use commands::sweep::{SweepSpec, Varying};

#[derive(Debug, Parser)]
#[command(name = "shardsec", version, about = "Faulty-block probability and years-to-fail for sharded PoS/pBFT chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Scenario file with one `key = value` per line.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// How the all-shards probability is combined: `paper` or `corrected`.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,

    /// CSV output path.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Monte Carlo epochs.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,

    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Confidence level of Monte Carlo intervals.
    #[arg(long, global = true, value_name = "LEVEL")]
    pub ci: Option<f64>,

    /// Override a config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed-form probabilities for one configuration.
    Analytic,
    /// Sweep committee size or adversary share and emit CSV.
    Sweep(commands::sweep::SweepArgs),
    /// Reproduce the two-scenario conquering-probability table as CSV.
    Table(commands::table::TableArgs),
    /// Estimate an event frequency by Monte Carlo.
    Simulate(commands::simulate::SimulateArgs),
    /// Compare analytic, exact and Monte Carlo values event by event.
    Compare(commands::compare::CompareArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub(crate) fn stdout(source: io::Error) -> Self {
        CliError::Io { path: "<stdout>".to_owned(), source }
    }

    pub(crate) fn csv(path: impl AsRef<Path>, err: csv::Error) -> Self {
        CliError::io(path, io::Error::other(err))
    }
}

impl From<shardsec_core::Error> for CliError {
    fn from(err: shardsec_core::Error) -> Self {
        match err {
            shardsec_core::Error::Config(c) => CliError::Config(c),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Output sinks for a command run.
pub struct Io<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Io<'_> {
    pub(crate) fn warn(&mut self, violations: &[Violation]) {
        for v in violations {
            // a failing stderr should not turn a result into an error
            let _ = writeln!(self.stderr, "{v}");
        }
    }
}

pub fn run(cli: &Cli, io: &mut Io<'_>) -> Result<()> {
    match &cli.command {
        Command::Analytic => commands::analytic::run(&cli.common, io),
        Command::Sweep(args) => commands::sweep::run(&cli.common, args, io),
        Command::Table(args) => commands::table::run(&cli.common, args, io),
        Command::Simulate(args) => commands::simulate::run(&cli.common, args, io),
        Command::Compare(args) => commands::compare::run(&cli.common, args, io),
    }
}

/// Reads `--config` (or starts from `fallback`), applies `--set` overrides
/// and validates the result. Warnings go to stderr.
pub(crate) fn load_config(common: &CommonArgs, fallback: Option<RawConfig>, io: &mut Io<'_>) -> Result<NetworkConfig> {
    let mut raw = match &common.config {
        Some(path) => read_raw(path)?,
        None => fallback.unwrap_or_default(),
    };
    for assignment in &common.set {
        raw.set(assignment)?;
    }
    let (config, warnings) = raw.build_validated()?;
    io.warn(&warnings);
    Ok(config)
}

pub(crate) fn read_raw(path: &Path) -> Result<RawConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(RawConfig::parse(&text)?)
}

pub(crate) fn modes_or(common: &CommonArgs, default: &[Mode]) -> Vec<Mode> {
    match common.mode {
        Some(mode) => vec![mode],
        None => default.to_vec(),
    }
}

pub(crate) const DEFAULT_TRIALS: u64 = 1_000_000;
pub(crate) const DEFAULT_CI: f64 = 0.99;


/// Writes `rows` as CSV to `path`, or to stdout when no path is given.
pub(crate) fn emit_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>], io: &mut Io<'_>) -> Result<()> {
    match path {
        Some(path) => {
            let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
            write_records(&mut writer, header, rows).map_err(|e| CliError::csv(path, e))?;
            writer.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let mut writer = csv::Writer::from_writer(&mut *io.stdout);
            write_records(&mut writer, header, rows).map_err(|e| CliError::stdout(io::Error::other(e)))?;
            writer.flush().map_err(CliError::stdout)
        }
    }
}

fn write_records<W: Write>(writer: &mut csv::Writer<W>, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    Ok(())
}

use clap::{Args, ValueEnum};

use shardsec_core::analytic::p_conquer;
use shardsec_core::params::{ConfigError, RawConfig, Violation};
use shardsec_core::{Mode, NetworkConfig, SecurityReport};

use super::{report_row, REPORT_HEADER};
use crate::{emit_csv, load_config, modes_or, CliError, CommonArgs, Io, Result};

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.1, 0.15, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Varying {
    #[value(name = "shard_committee_size")]
    ShardCommitteeSize,
    #[value(name = "beacon_committee_size")]
    BeaconCommitteeSize,
    #[value(name = "malicious_fraction")]
    MaliciousFraction,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to sweep.
    #[arg(long, value_enum, default_value = "shard_committee_size")]
    pub vary: Varying,

    /// Comma-separated values or an inclusive `start:stop:step` range.
    /// Committee sweeps default to every multiple of 3 up to the pool size.
    #[arg(long)]
    pub values: Option<String>,

    /// Adversary shares to sweep over (ignored when varying
    /// malicious_fraction).
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
}

/// One sweep: a varied parameter, its values, the adversary shares and
/// the modes to evaluate, on top of a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub varying: Varying,
    pub values: Vec<f64>,
    pub fractions: Vec<f64>,
    pub base: NetworkConfig,
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// The varied committee size, or the base shard committee size when the
    /// adversary share is varied.
    pub n: u64,
    pub r: f64,
    pub report: SecurityReport,
}

fn strictly_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what}: no values given")));
    }
    if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
        return Err(CliError::Usage(format!(
            "{what}: values must be strictly increasing without duplicates ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl SweepSpec {
    fn points(&self) -> Vec<(f64, f64)> {
        match self.varying {
            Varying::MaliciousFraction => self.values.iter().map(|&v| (v, v)).collect(),
            _ => self
                .fractions
                .iter()
                .flat_map(|&r| self.values.iter().map(move |&v| (r, v)))
                .collect(),
        }
    }

    fn config_at(&self, r: f64, value: f64) -> Result<NetworkConfig> {
        let mut config = self.base.clone();
        config.malicious_fraction = r;
        let size = || {
            if value.fract() != 0.0 || value < 1.0 {
                Err(CliError::Usage(format!("committee size {value} is not a positive integer")))
            } else {
                Ok(value as u64)
            }
        };
        match self.varying {
            Varying::ShardCommitteeSize => config.shard_committee_size = size()?,
            Varying::BeaconCommitteeSize => config.beacon_committee_size = size()?,
            Varying::MaliciousFraction => {}
        }
        let errors: Vec<Violation> = config.validate().into_iter().filter(Violation::is_error).collect();
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError::Invalid(errors).into())
        }
    }

    /// Checks the value lists and that every point yields a valid config.
    pub fn validate(&self) -> Result<()> {
        strictly_increasing(&self.values, "--values")?;
        if self.varying != Varying::MaliciousFraction {
            strictly_increasing(&self.fractions, "--fractions")?;
        }
        if self.modes.is_empty() {
            return Err(CliError::Usage("no modes selected".to_owned()));
        }
        for (r, value) in self.points() {
            self.config_at(r, value)?;
        }
        Ok(())
    }

    /// Evaluates every point; rows come ordered by (R, n, mode).
    pub fn rows(&self) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let mut rows = Vec::new();
        for (r, value) in self.points() {
            let config = self.config_at(r, value)?;
            let n = match self.varying {
                Varying::BeaconCommitteeSize => config.beacon_committee_size,
                _ => config.shard_committee_size,
            };
            for &mode in &self.modes {
                rows.push(SweepRow { n, r, report: p_conquer(&config, mode)? });
            }
        }
        Ok(rows)
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse --values `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || !step.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(bad());
        }
        return Ok((0..=count as u64).map(|i| start + i as f64 * step).collect());
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

/// Default base for sweeps without `--config`: the 2000-node scenario with
/// n = 150 and n' = 300.
pub fn default_base() -> RawConfig {
    RawConfig::from(&NetworkConfig::scenario_one(150, 300, 0.1))
}

pub fn spec_from_args(common: &CommonArgs, args: &SweepArgs, io: &mut Io<'_>) -> Result<SweepSpec> {
    let base = load_config(common, Some(default_base()), io)?;
    let values = match (&args.values, args.vary) {
        (Some(text), _) => parse_values(text)?,
        (None, Varying::ShardCommitteeSize) => (1..=base.shard_pool_size / 3).map(|i| (3 * i) as f64).collect(),
        (None, Varying::BeaconCommitteeSize) => (1..=base.beacon_pool_size / 3).map(|i| (3 * i) as f64).collect(),
        (None, Varying::MaliciousFraction) => {
            return Err(CliError::Usage("--values is required when varying malicious_fraction".to_owned()))
        }
    };
    Ok(SweepSpec {
        varying: args.vary,
        values,
        fractions: args.fractions.clone().unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec()),
        base,
        modes: modes_or(common, &Mode::ALL),
    })
}

pub fn run(common: &CommonArgs, args: &SweepArgs, io: &mut Io<'_>) -> Result<()> {
    let spec = spec_from_args(common, args, io)?;
    let rows: Vec<Vec<String>> = spec.rows()?.iter().map(|row| report_row(row.n, row.r, &row.report)).collect();
    emit_csv(common.out.as_deref(), &REPORT_HEADER, &rows, io)
}

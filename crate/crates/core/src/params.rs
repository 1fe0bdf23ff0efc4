//! Scenario parameters: network configuration, validator pools and quorum
//! thresholds, plus the flat `key = value` configuration file format.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Tolerance used when snapping floating-point products onto the integer
/// grid, so that `(1 - 1/3) * 150` counts as exactly 100.
const SNAP_EPS: f64 = 1e-9;

/// A validator population for one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pool {
    honest: u64,
    malicious: u64,
}

impl Pool {
    pub const fn new(honest: u64, malicious: u64) -> Self {
        Self { honest, malicious }
    }

    pub const fn honest(&self) -> u64 {
        self.honest
    }

    pub const fn malicious(&self) -> u64 {
        self.malicious
    }

    pub const fn total(&self) -> u64 {
        self.honest + self.malicious
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pool{{H:{},M:{},V:{}}}", self.honest, self.malicious, self.total())
    }
}

/// Full parameter set of a sharded network scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub total_nodes: u64,
    pub shard_count: u64,
    /// Validators staked per shard.
    pub shard_pool_size: u64,
    /// Validators staked for the beacon chain.
    pub beacon_pool_size: u64,
    pub shard_committee_size: u64,
    pub beacon_committee_size: u64,
    /// Share of malicious validators, applied to every shard pool and to
    /// the beacon pool.
    pub malicious_fraction: f64,
    /// Fraction of faulty committee members tolerated by the quorum rule.
    pub resiliency: f64,
    /// Separate beacon resiliency; falls back to `resiliency` when unset.
    pub beacon_resiliency: Option<f64>,
    pub epochs_per_year: f64,
}

pub const DEFAULT_RESILIENCY: f64 = 1.0 / 3.0;
pub const DEFAULT_EPOCHS_PER_YEAR: f64 = 365.0;

impl NetworkConfig {
    /// N = 2000, eight shards of 200 validators, a beacon pool of 400.
    pub fn scenario_one(shard_committee: u64, beacon_committee: u64, malicious_fraction: f64) -> Self {
        Self {
            total_nodes: 2000,
            shard_count: 8,
            shard_pool_size: 200,
            beacon_pool_size: 400,
            shard_committee_size: shard_committee,
            beacon_committee_size: beacon_committee,
            malicious_fraction,
            resiliency: DEFAULT_RESILIENCY,
            beacon_resiliency: None,
            epochs_per_year: DEFAULT_EPOCHS_PER_YEAR,
        }
    }

    /// N = 4000, eight shards of 400 validators, a beacon pool of 800.
    pub fn scenario_two(shard_committee: u64, beacon_committee: u64, malicious_fraction: f64) -> Self {
        Self {
            total_nodes: 4000,
            shard_count: 8,
            shard_pool_size: 400,
            beacon_pool_size: 800,
            ..Self::scenario_one(shard_committee, beacon_committee, malicious_fraction)
        }
    }

    pub fn shard_pool(&self) -> Pool {
        derive_pool(self.shard_pool_size, self.malicious_fraction)
    }

    pub fn beacon_pool(&self) -> Pool {
        derive_pool(self.beacon_pool_size, self.malicious_fraction)
    }

    pub fn beacon_resiliency(&self) -> f64 {
        self.beacon_resiliency.unwrap_or(self.resiliency)
    }

    /// Smallest malicious count that lets a shard committee pass a block.
    pub fn shard_threshold(&self) -> u64 {
        committee_threshold(self.shard_committee_size, self.resiliency)
    }

    /// Smallest malicious count that lets the beacon committee pass a block.
    pub fn beacon_threshold(&self) -> u64 {
        committee_threshold(self.beacon_committee_size, self.beacon_resiliency())
    }

    /// Smallest number of faulty shard committees that carries the
    /// all-shards vote.
    pub fn shard_quorum(&self) -> u64 {
        committee_threshold(self.shard_count, self.resiliency)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Renders the configuration in the flat file format accepted by
    /// [`RawConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in ConfigKey::ALL {
            let value = match key {
                ConfigKey::TotalNodes => self.total_nodes.to_string(),
                ConfigKey::ShardCount => self.shard_count.to_string(),
                ConfigKey::ShardPoolSize => self.shard_pool_size.to_string(),
                ConfigKey::BeaconPoolSize => self.beacon_pool_size.to_string(),
                ConfigKey::ShardCommitteeSize => self.shard_committee_size.to_string(),
                ConfigKey::BeaconCommitteeSize => self.beacon_committee_size.to_string(),
                ConfigKey::MaliciousFraction => format!("{:?}", self.malicious_fraction),
                ConfigKey::Resiliency => format!("{:?}", self.resiliency),
                ConfigKey::BeaconResiliency => match self.beacon_resiliency {
                    Some(r) => format!("{r:?}"),
                    None => continue,
                },
                ConfigKey::EpochsPerYear => format!("{:?}", self.epochs_per_year),
            };
            out.push_str(key.as_str());
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(code: &'static str, message: String) -> Self {
        Self { code, severity: Severity::Error, message }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}[{}]: {}", self.code, self.message)
    }
}

/// Lists every invariant `config` violates; an empty list means valid.
///
/// Committee/pool bound breaches and out-of-range fractions are errors. A
/// node count that does not add up to `shard_count * shard_pool_size +
/// beacon_pool_size` is only a warning.
pub fn validate(config: &NetworkConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    let counts = [
        ("total_nodes", config.total_nodes),
        ("shard_count", config.shard_count),
        ("shard_pool_size", config.shard_pool_size),
        ("beacon_pool_size", config.beacon_pool_size),
        ("shard_committee_size", config.shard_committee_size),
        ("beacon_committee_size", config.beacon_committee_size),
    ];
    for (name, value) in counts {
        if value == 0 {
            out.push(Violation::error("zero_count", format!("{name} must be positive")));
        }
    }

    if config.shard_committee_size > config.shard_pool_size {
        out.push(Violation::error(
            "shard_committee_exceeds_pool",
            format!(
                "shard committee exceeds pool: shard_committee_size {} > shard_pool_size {}",
                config.shard_committee_size, config.shard_pool_size
            ),
        ));
    }
    if config.beacon_committee_size > config.beacon_pool_size {
        out.push(Violation::error(
            "beacon_committee_exceeds_pool",
            format!(
                "beacon committee exceeds pool: beacon_committee_size {} > beacon_pool_size {}",
                config.beacon_committee_size, config.beacon_pool_size
            ),
        ));
    }
    if !(0.0..=1.0).contains(&config.malicious_fraction) {
        out.push(Violation::error(
            "malicious_fraction_out_of_range",
            format!("malicious_fraction {} is outside [0, 1]", config.malicious_fraction),
        ));
    }
    if !(config.resiliency > 0.0 && config.resiliency < 1.0) {
        out.push(Violation::error(
            "resiliency_out_of_range",
            format!("resiliency {} is outside (0, 1)", config.resiliency),
        ));
    }
    if let Some(r) = config.beacon_resiliency {
        if !(r > 0.0 && r < 1.0) {
            out.push(Violation::error(
                "beacon_resiliency_out_of_range",
                format!("beacon_resiliency {r} is outside (0, 1)"),
            ));
        }
    }
    if !(config.epochs_per_year > 0.0 && config.epochs_per_year.is_finite()) {
        out.push(Violation::error(
            "epochs_per_year_not_positive",
            format!("epochs_per_year {} must be a positive finite number", config.epochs_per_year),
        ));
    }

    let staked = config
        .shard_count
        .checked_mul(config.shard_pool_size)
        .and_then(|s| s.checked_add(config.beacon_pool_size));
    if staked != Some(config.total_nodes) {
        let staked = staked.map_or_else(|| "overflow".to_owned(), |s| s.to_string());
        out.push(Violation {
            code: "population_mismatch",
            severity: Severity::Warning,
            message: format!(
                "shard_count * shard_pool_size + beacon_pool_size = {staked}, but total_nodes = {}",
                config.total_nodes
            ),
        });
    }

    out
}

/// Splits a pool of `pool_size` validators into honest and malicious
/// members, rounding `malicious_fraction * pool_size` half-up.
pub fn derive_pool(pool_size: u64, malicious_fraction: f64) -> Pool {
    let fraction = malicious_fraction.clamp(0.0, 1.0);
    let exact = fraction * pool_size as f64;
    let malicious = ((exact + 0.5 + SNAP_EPS * exact.max(1.0)).floor() as u64).min(pool_size);
    Pool::new(pool_size - malicious, malicious)
}

/// Minimum number of votes a committee of `committee_size` needs to pass a
/// block when a `resiliency` share of members may be faulty, i.e.
/// `ceil((1 - resiliency) * committee_size)`.
pub fn committee_threshold(committee_size: u64, resiliency: f64) -> u64 {
    let exact = (1.0 - resiliency) * committee_size as f64;
    let nearest = exact.round();
    let k = if (exact - nearest).abs() <= SNAP_EPS * exact.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    (k.max(0.0) as u64).min(committee_size)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: expected `key = value`, found `{text}`")]
    Malformed { line: usize, text: String },

    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },

    #[error("missing required key `{0}`")]
    Missing(String),

    #[error("key `{key}` given twice (lines {first} and {second})")]
    Duplicate { key: String, first: usize, second: usize },

    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConfigKey {
    TotalNodes,
    ShardCount,
    ShardPoolSize,
    BeaconPoolSize,
    ShardCommitteeSize,
    BeaconCommitteeSize,
    MaliciousFraction,
    Resiliency,
    BeaconResiliency,
    EpochsPerYear,
}

impl ConfigKey {
    pub const ALL: [ConfigKey; 10] = [
        ConfigKey::TotalNodes,
        ConfigKey::ShardCount,
        ConfigKey::ShardPoolSize,
        ConfigKey::BeaconPoolSize,
        ConfigKey::ShardCommitteeSize,
        ConfigKey::BeaconCommitteeSize,
        ConfigKey::MaliciousFraction,
        ConfigKey::Resiliency,
        ConfigKey::BeaconResiliency,
        ConfigKey::EpochsPerYear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigKey::TotalNodes => "total_nodes",
            ConfigKey::ShardCount => "shard_count",
            ConfigKey::ShardPoolSize => "shard_pool_size",
            ConfigKey::BeaconPoolSize => "beacon_pool_size",
            ConfigKey::ShardCommitteeSize => "shard_committee_size",
            ConfigKey::BeaconCommitteeSize => "beacon_committee_size",
            ConfigKey::MaliciousFraction => "malicious_fraction",
            ConfigKey::Resiliency => "resiliency",
            ConfigKey::BeaconResiliency => "beacon_resiliency",
            ConfigKey::EpochsPerYear => "epochs_per_year",
        }
    }

    fn is_integer(self) -> bool {
        matches!(
            self,
            ConfigKey::TotalNodes
                | ConfigKey::ShardCount
                | ConfigKey::ShardPoolSize
                | ConfigKey::BeaconPoolSize
                | ConfigKey::ShardCommitteeSize
                | ConfigKey::BeaconCommitteeSize
        )
    }
}

impl FromStr for ConfigKey {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConfigKey::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Int(u64),
    Real(f64),
}

impl Value {
    fn as_real(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Real(v) => v,
        }
    }
}

/// Unvalidated key/value pairs collected from a config file and `--set`
/// overrides. Later assignments through [`RawConfig::set`] replace earlier
/// ones; duplicate keys inside one file are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<ConfigKey, Value>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::new();
        let mut seen: BTreeMap<ConfigKey, usize> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Malformed { line: lineno, text: content.to_owned() });
            };
            let key = key.trim();
            let parsed_key: ConfigKey = key
                .parse()
                .map_err(|_| ConfigError::UnknownKey { line: lineno, key: key.to_owned() })?;
            if let Some(first) = seen.insert(parsed_key, lineno) {
                return Err(ConfigError::Duplicate {
                    key: key.to_owned(),
                    first,
                    second: lineno,
                });
            }
            raw.insert(parsed_key, value.trim())?;
        }
        Ok(raw)
    }

    /// Applies a single `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError::Malformed { line: 0, text: assignment.to_owned() });
        };
        let key = key.trim();
        let parsed_key: ConfigKey =
            key.parse().map_err(|_| ConfigError::UnknownKey { line: 0, key: key.to_owned() })?;
        self.insert(parsed_key, value.trim())
    }

    /// Layers `other` on top of `self`; keys present in both take `other`'s
    /// value.
    pub fn merge(&mut self, other: &RawConfig) {
        self.values.extend(other.values.iter().map(|(k, v)| (*k, *v)));
    }

    fn insert(&mut self, key: ConfigKey, value: &str) -> Result<(), ConfigError> {
        let invalid = |reason: &str| ConfigError::InvalidValue {
            key: key.as_str().to_owned(),
            value: value.to_owned(),
            reason: reason.to_owned(),
        };
        let parsed = if key.is_integer() {
            Value::Int(value.parse::<u64>().map_err(|_| invalid("expected a nonnegative integer"))?)
        } else {
            Value::Real(parse_real(value).ok_or_else(|| invalid("expected a real number or a/b fraction"))?)
        };
        self.values.insert(key, parsed);
        Ok(())
    }

    fn int(&self, key: ConfigKey) -> Result<u64, ConfigError> {
        match self.values.get(&key) {
            Some(Value::Int(v)) => Ok(*v),
            Some(Value::Real(_)) => unreachable!("integer keys only hold integers"),
            None => Err(ConfigError::Missing(key.as_str().to_owned())),
        }
    }

    fn real(&self, key: ConfigKey) -> Option<f64> {
        self.values.get(&key).map(|v| v.as_real())
    }

    /// Assembles a [`NetworkConfig`] without checking invariants.
    pub fn build(&self) -> Result<NetworkConfig, ConfigError> {
        Ok(NetworkConfig {
            total_nodes: self.int(ConfigKey::TotalNodes)?,
            shard_count: self.int(ConfigKey::ShardCount)?,
            shard_pool_size: self.int(ConfigKey::ShardPoolSize)?,
            beacon_pool_size: self.int(ConfigKey::BeaconPoolSize)?,
            shard_committee_size: self.int(ConfigKey::ShardCommitteeSize)?,
            beacon_committee_size: self.int(ConfigKey::BeaconCommitteeSize)?,
            malicious_fraction: self
                .real(ConfigKey::MaliciousFraction)
                .ok_or_else(|| ConfigError::Missing("malicious_fraction".to_owned()))?,
            resiliency: self.real(ConfigKey::Resiliency).unwrap_or(DEFAULT_RESILIENCY),
            beacon_resiliency: self.real(ConfigKey::BeaconResiliency),
            epochs_per_year: self.real(ConfigKey::EpochsPerYear).unwrap_or(DEFAULT_EPOCHS_PER_YEAR),
        })
    }

    /// Builds the configuration and rejects it if any hard invariant fails.
    /// Warnings are returned alongside the config.
    pub fn build_validated(&self) -> Result<(NetworkConfig, Vec<Violation>), ConfigError> {
        let config = self.build()?;
        let (errors, warnings): (Vec<_>, Vec<_>) =
            validate(&config).into_iter().partition(Violation::is_error);
        if errors.is_empty() {
            Ok((config, warnings))
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }
}

impl From<&NetworkConfig> for RawConfig {
    fn from(config: &NetworkConfig) -> Self {
        RawConfig::parse(&config.to_config_string()).expect("rendered config always parses")
    }
}

fn parse_real(s: &str) -> Option<f64> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            if den == 0.0 {
                return None;
            }
            num / den
        }
        None => s.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

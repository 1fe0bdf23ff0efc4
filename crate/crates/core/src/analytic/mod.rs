//! Closed-form faulty-block probabilities evaluated in the log domain.
//!
//! Probabilities for realistic networks reach 1e-80 and below, so every quantity
//! is carried as a [`LogProb`] and only exponentiated for display.

mod logprob;

use std::fmt;
use std::str::FromStr;

pub use logprob::{log_sum_exp, LogProb};

use crate::error::{domain, Error, Result};
use crate::params::{ConfigError, NetworkConfig, Pool, Violation};

/// How the all-shards probability combines per-shard failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// `sum_{i >= i_min} p^i`, the published geometric form, capped at 1.
    PaperFaithful,
    /// `sum_{i >= i_min} C(z, i) p^i (1 - p)^(z - i)`, the binomial tail
    /// over independent shards.
    BinomialCorrected,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::PaperFaithful, Mode::BinomialCorrected];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PaperFaithful => "paper",
            Mode::BinomialCorrected => "corrected",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" | "paper-faithful" => Ok(Mode::PaperFaithful),
            "corrected" | "binomial-corrected" => Ok(Mode::BinomialCorrected),
            other => Err(format!("unknown mode `{other}` (expected `paper` or `corrected`)")),
        }
    }
}

/// The four probabilities and the years-to-fail figure for one
/// configuration and mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    pub p_shard: LogProb,
    pub p_all_shards: LogProb,
    pub p_beacon: LogProb,
    pub p_conquer: LogProb,
    pub years_to_fail: f64,
    pub mode: Mode,
}

impl SecurityReport {
    /// Combines already computed constituents: the conquering probability
    /// is their product.
    pub fn from_constituents(
        p_shard: LogProb,
        p_all_shards: LogProb,
        p_beacon: LogProb,
        mode: Mode,
        epochs_per_year: f64,
    ) -> Self {
        let p_conquer = LogProb::product(&[p_shard, p_all_shards, p_beacon]);
        Self {
            p_shard,
            p_all_shards,
            p_beacon,
            p_conquer,
            years_to_fail: years_to_fail(p_conquer, epochs_per_year),
            mode,
        }
    }
}

/// `ln C(a, b)`; `-inf` when `b > a`.
pub fn ln_choose(a: u64, b: u64) -> f64 {
    statrs::function::factorial::ln_binomial(a, b)
}

/// Upper tail `P(X >= k_min)` of the number of malicious members `X` in a
/// committee of `committee_size` drawn without replacement from `pool`.
fn hypergeometric_tail(pool: Pool, committee_size: u64, k_min: u64, label: &str) -> Result<LogProb> {
    let (honest, malicious, total) = (pool.honest(), pool.malicious(), pool.total());
    if committee_size > total {
        return Err(domain(format!(
            "{label}: committee size {committee_size} exceeds pool total {total}"
        )));
    }
    if k_min > committee_size {
        return Err(domain(format!(
            "{label}: threshold {k_min} exceeds committee size {committee_size}"
        )));
    }

    let support_lo = committee_size.saturating_sub(honest);
    let support_hi = committee_size.min(malicious);
    let lo = k_min.max(support_lo);
    if lo > support_hi {
        return Ok(LogProb::ZERO);
    }
    if k_min <= support_lo {
        return Ok(LogProb::ONE);
    }

    let ln_total = ln_choose(total, committee_size);
    let mut terms: Vec<f64> = (lo..=support_hi)
        .map(|k| ln_choose(malicious, k) + ln_choose(honest, committee_size - k) - ln_total)
        .collect();
    Ok(LogProb::from_ln_clamped(log_sum_exp(&mut terms)))
}

/// Probability that a shard committee of size `n` drawn from `pool` holds
/// at least `k_min` malicious members and so can commit a faulty block.
pub fn p_shard_faulty(pool: Pool, n: u64, k_min: u64) -> Result<LogProb> {
    hypergeometric_tail(pool, n, k_min, "shard")
}

/// Same tail as [`p_shard_faulty`], for the beacon committee.
pub fn p_beacon_faulty(pool: Pool, n_prime: u64, k_min: u64) -> Result<LogProb> {
    hypergeometric_tail(pool, n_prime, k_min, "beacon")
}

/// Probability that at least `i_min` of `shard_count` shard committees
/// commit a faulty block, each doing so with probability `p_shard`.
pub fn p_all_shards_faulty(p_shard: LogProb, shard_count: u64, i_min: u64, mode: Mode) -> Result<LogProb> {
    if i_min > shard_count {
        return Err(domain(format!(
            "all-shards quorum {i_min} exceeds shard count {shard_count}"
        )));
    }
    let mut terms: Vec<f64> = match mode {
        Mode::PaperFaithful => (i_min..=shard_count).map(|i| p_shard.powi(i).ln()).collect(),
        Mode::BinomialCorrected => {
            let q = p_shard.complement();
            (i_min..=shard_count)
                .map(|i| ln_choose(shard_count, i) + p_shard.powi(i).ln() + q.powi(shard_count - i).ln())
                .collect()
        }
    };
    Ok(LogProb::from_ln_clamped(log_sum_exp(&mut terms)))
}

/// Expected years until the first conquering epoch: `1 / (epochs_per_year
/// * p)`, infinite when `p` is exactly zero.
pub fn years_to_fail(p: LogProb, epochs_per_year: f64) -> f64 {
    if p.is_zero() {
        f64::INFINITY
    } else {
        (-(p.ln() + epochs_per_year.ln())).exp()
    }
}

/// Evaluates every constituent probability for `config` and combines them
/// into a [`SecurityReport`].
pub fn p_conquer(config: &NetworkConfig, mode: Mode) -> Result<SecurityReport> {
    let errors: Vec<Violation> = config.validate().into_iter().filter(Violation::is_error).collect();
    if !errors.is_empty() {
        return Err(Error::Config(ConfigError::Invalid(errors)));
    }
    let p_shard = p_shard_faulty(config.shard_pool(), config.shard_committee_size, config.shard_threshold())?;
    let p_all = p_all_shards_faulty(p_shard, config.shard_count, config.shard_quorum(), mode)?;
    let p_beacon = p_beacon_faulty(config.beacon_pool(), config.beacon_committee_size, config.beacon_threshold())?;
    Ok(SecurityReport::from_constituents(p_shard, p_all, p_beacon, mode, config.epochs_per_year))
}

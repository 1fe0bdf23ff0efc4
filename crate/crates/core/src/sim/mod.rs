//! Seeded Monte Carlo simulation of the per-epoch committee shuffle.
//!
//! Every epoch draws a fresh committee for each shard and for the beacon
//! chain, checks which committees reach a malicious quorum, and records the
//! resulting events. Trials are split into fixed-size batches; batch `b`
//! always draws from ChaCha8 stream `b` of the run's seed, so a tally
//! depends only on `(config, trials, seed)` and never on how batches are
//! scheduled across workers.

mod interval;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use interval::{clopper_pearson, Interval};

use crate::error::{domain, Error, Result};
use crate::params::{ConfigError, NetworkConfig, Pool, Violation};

/// Trials per RNG stream.
pub const BATCH_SIZE: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    ShardFaulty,
    AllShardsFaulty,
    BeaconFaulty,
    Conquered,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::ShardFaulty, Event::AllShardsFaulty, Event::BeaconFaulty, Event::Conquered];

    pub fn as_str(self) -> &'static str {
        match self {
            Event::ShardFaulty => "shard-faulty",
            Event::AllShardsFaulty => "all-shards-faulty",
            Event::BeaconFaulty => "beacon-faulty",
            Event::Conquered => "conquered",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Event {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Event::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown event `{s}`"))
    }
}

/// Validator pools of every chain in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub shard_pools: Vec<Pool>,
    pub beacon_pool: Pool,
}

impl Population {
    /// All shards share the same pool composition.
    pub fn from_config(config: &NetworkConfig) -> Self {
        Self {
            shard_pools: vec![config.shard_pool(); config.shard_count as usize],
            beacon_pool: config.beacon_pool(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpochOutcome {
    pub shard_faulty: Vec<bool>,
    pub beacon_faulty: bool,
    pub all_shards_faulty: bool,
    /// Shard 0 is the block's own shard.
    pub conquered: bool,
}

/// Draws a committee of `n` validators uniformly without replacement from
/// `pool` and returns how many of them are malicious.
pub fn sample_committee<R: Rng + ?Sized>(pool: Pool, n: u64, rng: &mut R) -> Result<u64> {
    if n > pool.total() {
        return Err(domain(format!("committee size {n} exceeds pool total {}", pool.total())));
    }
    Ok(draw_malicious(pool, n, rng))
}

/// Partial Fisher–Yates over the virtual index range `0..V` where indices
/// below `M` are malicious. Only the malicious/honest split of the
/// unpicked range is tracked, so no index array is needed. For `n > V/2`
/// the excluded validators are drawn instead.
fn draw_malicious<R: Rng + ?Sized>(pool: Pool, n: u64, rng: &mut R) -> u64 {
    let total = pool.total();
    let (draws, complement) = if 2 * n > total { (total - n, true) } else { (n, false) };
    let mut remaining = total;
    let mut malicious_left = pool.malicious();
    for _ in 0..draws {
        if rng.random_range(0..remaining) < malicious_left {
            malicious_left -= 1;
        }
        remaining -= 1;
    }
    let picked = pool.malicious() - malicious_left;
    if complement {
        malicious_left
    } else {
        picked
    }
}

/// Precomputed thresholds for repeated epoch sampling.
#[derive(Debug, Clone)]
struct EpochSampler {
    population: Population,
    shard_committee: u64,
    beacon_committee: u64,
    shard_threshold: u64,
    beacon_threshold: u64,
    shard_quorum: u64,
}

impl EpochSampler {
    fn new(population: Population, config: &NetworkConfig) -> Result<Self> {
        for pool in population.shard_pools.iter() {
            if config.shard_committee_size > pool.total() {
                return Err(domain(format!(
                    "shard committee {} exceeds shard pool {}",
                    config.shard_committee_size,
                    pool.total()
                )));
            }
        }
        if config.beacon_committee_size > population.beacon_pool.total() {
            return Err(domain(format!(
                "beacon committee {} exceeds beacon pool {}",
                config.beacon_committee_size,
                population.beacon_pool.total()
            )));
        }
        Ok(Self {
            population,
            shard_committee: config.shard_committee_size,
            beacon_committee: config.beacon_committee_size,
            shard_threshold: config.shard_threshold(),
            beacon_threshold: config.beacon_threshold(),
            shard_quorum: config.shard_quorum(),
        })
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut EpochOutcome) {
        out.shard_faulty.clear();
        out.shard_faulty.extend(
            self.population
                .shard_pools
                .iter()
                .map(|&pool| draw_malicious(pool, self.shard_committee, rng) >= self.shard_threshold),
        );
        out.beacon_faulty = draw_malicious(self.population.beacon_pool, self.beacon_committee, rng) >= self.beacon_threshold;
        let faulty_shards = out.shard_faulty.iter().filter(|&&f| f).count() as u64;
        out.all_shards_faulty = faulty_shards >= self.shard_quorum;
        out.conquered =
            out.shard_faulty.first().copied().unwrap_or(false) && out.all_shards_faulty && out.beacon_faulty;
    }
}

/// Simulates one epoch: fresh committees everywhere, then the quorum checks.
pub fn run_epoch<R: Rng + ?Sized>(population: &Population, config: &NetworkConfig, rng: &mut R) -> Result<EpochOutcome> {
    let sampler = EpochSampler::new(population.clone(), config)?;
    let mut outcome = EpochOutcome::default();
    sampler.sample_into(rng, &mut outcome);
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts([u64; 4]);

impl Counts {
    fn record(&mut self, outcome: &EpochOutcome) {
        let flags = [
            outcome.shard_faulty.first().copied().unwrap_or(false),
            outcome.all_shards_faulty,
            outcome.beacon_faulty,
            outcome.conquered,
        ];
        for (count, flag) in self.0.iter_mut().zip(flags) {
            *count += u64::from(flag);
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

/// How trial batches are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    /// Rayon pool with the given number of threads; `0` means rayon's
    /// default. Runs sequentially when built without the `parallel` feature.
    Parallel { workers: usize },
}

impl Default for Executor {
    fn default() -> Self {
        Executor::Parallel { workers: 0 }
    }
}

/// Event counts from a Monte Carlo run, with exact binomial intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTally {
    /// The event the run was asked about; every event is counted anyway.
    pub event: Event,
    pub trials: u64,
    pub event_counts: BTreeMap<Event, u64>,
    pub seed: u64,
    pub ci_level: f64,
    pub intervals: BTreeMap<Event, Interval>,
}

impl TrialTally {
    pub fn count(&self, event: Event) -> u64 {
        self.event_counts[&event]
    }

    pub fn estimate(&self, event: Event) -> f64 {
        self.count(event) as f64 / self.trials as f64
    }

    pub fn interval(&self, event: Event) -> Interval {
        self.intervals[&event]
    }
}

fn run_batch(sampler: &EpochSampler, seed: u64, batch: u64, trials: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let len = BATCH_SIZE.min(trials - batch * BATCH_SIZE);
    let mut outcome = EpochOutcome::default();
    let mut counts = Counts::default();
    for _ in 0..len {
        sampler.sample_into(&mut rng, &mut outcome);
        counts.record(&outcome);
    }
    counts
}

fn run_sequential(sampler: &EpochSampler, seed: u64, trials: u64) -> Counts {
    let mut total = Counts::default();
    for batch in 0..trials.div_ceil(BATCH_SIZE) {
        total += run_batch(sampler, seed, batch, trials);
    }
    total
}

#[cfg(feature = "parallel")]
fn run_parallel(sampler: &EpochSampler, seed: u64, trials: u64, workers: usize) -> Counts {
    use rayon::prelude::*;
    let work = || {
        (0..trials.div_ceil(BATCH_SIZE))
            .into_par_iter()
            .map(|batch| run_batch(sampler, seed, batch, trials))
            .reduce(Counts::default, |mut a, b| {
                a += b;
                a
            })
    };
    if workers == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel(sampler: &EpochSampler, seed: u64, trials: u64, _workers: usize) -> Counts {
    run_sequential(sampler, seed, trials)
}

/// Runs `trials` independent epochs with the default executor.
pub fn estimate(config: &NetworkConfig, event: Event, trials: u64, seed: u64, ci_level: f64) -> Result<TrialTally> {
    estimate_with(config, event, trials, seed, ci_level, Executor::default())
}

pub fn estimate_with(
    config: &NetworkConfig,
    event: Event,
    trials: u64,
    seed: u64,
    ci_level: f64,
    executor: Executor,
) -> Result<TrialTally> {
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(domain(format!("confidence level {ci_level} is outside (0, 1)")));
    }
    let errors: Vec<Violation> = config.validate().into_iter().filter(Violation::is_error).collect();
    if !errors.is_empty() {
        return Err(Error::Config(ConfigError::Invalid(errors)));
    }
    let sampler = EpochSampler::new(Population::from_config(config), config)?;
    let counts = match executor {
        Executor::Sequential => run_sequential(&sampler, seed, trials),
        Executor::Parallel { workers } => run_parallel(&sampler, seed, trials, workers),
    };
    let event_counts: BTreeMap<Event, u64> = Event::ALL.into_iter().zip(counts.0).collect();
    let intervals = event_counts
        .iter()
        .map(|(&e, &c)| (e, clopper_pearson(c, trials, ci_level)))
        .collect();
    Ok(TrialTally { event, trials, event_counts, seed, ci_level, intervals })
}

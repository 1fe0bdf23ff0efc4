use clap::Args;

use shardsec_core::analytic::p_conquer;
use shardsec_core::oracle::{enumerate_committees, exact_all_shards, exact_hypergeom_tail, ExactProb};
use shardsec_core::sim::{estimate_with, Event, Executor, Interval, TrialTally};
use shardsec_core::{Error, LogProb, Mode, NetworkConfig};

use crate::{emit_csv, format, load_config, modes_or, CliError, CommonArgs, Io, Result, DEFAULT_CI, DEFAULT_TRIALS};

/// Relative agreement required between the log-domain and exact values.
pub const EXACT_TOLERANCE: f64 = 1e-10;

pub const COMPARE_HEADER: [&str; 10] = [
    "event",
    "mode",
    "analytic",
    "exact",
    "enumeration",
    "monte_carlo",
    "mc_lower",
    "mc_upper",
    "exact_verdict",
    "mc_verdict",
];

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Worker threads for the simulation; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub event: Event,
    /// `None` for events that do not depend on the all-shards mode.
    pub mode: Option<Mode>,
    pub analytic: LogProb,
    pub exact: ExactProb,
    /// Absent when enumeration would exceed its budget.
    pub enumeration: Option<ExactProb>,
    /// Point estimate and interval; absent when no trials were run.
    pub monte_carlo: Option<(f64, Interval)>,
}

impl CompareRow {
    pub fn exact_agrees(&self) -> bool {
        match (self.analytic.is_zero(), self.exact.is_zero()) {
            (true, true) => true,
            (false, false) => ((self.analytic.ln() - self.exact.ln()).exp_m1()).abs() <= EXACT_TOLERANCE,
            _ => false,
        }
    }

    pub fn exact_verdict(&self) -> &'static str {
        if self.exact_agrees() {
            "within tolerance"
        } else {
            "MISMATCH"
        }
    }

    pub fn mc_verdict(&self) -> &'static str {
        match &self.monte_carlo {
            None => "skipped",
            Some((_, ci)) if ci.contains(self.analytic.prob()) => "within CI",
            Some(_) => "outside CI",
        }
    }

    pub fn mode_label(&self) -> &'static str {
        self.mode.map_or("any", Mode::as_str)
    }

    pub fn to_record(&self) -> Vec<String> {
        let (mc, lo, hi) = match &self.monte_carlo {
            Some((p, ci)) => (format::sig6(*p), format::sig6(ci.lower), format::sig6(ci.upper)),
            None => Default::default(),
        };
        vec![
            self.event.to_string(),
            self.mode_label().to_owned(),
            format::prob(self.analytic),
            format::sig6(self.exact.to_f64()),
            self.enumeration.as_ref().map(|e| format::sig6(e.to_f64())).unwrap_or_default(),
            mc,
            lo,
            hi,
            self.exact_verdict().to_owned(),
            self.mc_verdict().to_owned(),
        ]
    }
}

fn enumerated(result: shardsec_core::error::Result<ExactProb>) -> Result<Option<ExactProb>> {
    match result {
        Ok(p) => Ok(Some(p)),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Triangulates every event through the analytic engine, the exact
/// rational tails, brute-force enumeration (when in budget) and Monte Carlo
/// (when `trials > 0`).
pub fn compare(
    config: &NetworkConfig,
    modes: &[Mode],
    trials: u64,
    seed: u64,
    ci: f64,
    executor: Executor,
) -> Result<Vec<CompareRow>> {
    let shard_pool = config.shard_pool();
    let beacon_pool = config.beacon_pool();
    let (n, n_prime) = (config.shard_committee_size, config.beacon_committee_size);
    let (k_shard, k_beacon) = (config.shard_threshold(), config.beacon_threshold());

    let exact_shard = exact_hypergeom_tail(shard_pool, n, k_shard)?;
    let exact_beacon = exact_hypergeom_tail(beacon_pool, n_prime, k_beacon)?;
    let enum_shard = enumerated(enumerate_committees(shard_pool, n, k_shard))?;
    let enum_beacon = enumerated(enumerate_committees(beacon_pool, n_prime, k_beacon))?;

    let tally: Option<TrialTally> = if trials > 0 {
        Some(estimate_with(config, Event::Conquered, trials, seed, ci, executor)?)
    } else {
        None
    };
    let mc = |event: Event| tally.as_ref().map(|t| (t.estimate(event), t.interval(event)));

    let reports = modes
        .iter()
        .map(|&mode| p_conquer(config, mode))
        .collect::<shardsec_core::error::Result<Vec<_>>>()?;
    let first = reports.first().ok_or_else(|| CliError::Usage("no modes selected".to_owned()))?;

    let mut rows = vec![CompareRow {
        event: Event::ShardFaulty,
        mode: None,
        analytic: first.p_shard,
        exact: exact_shard.clone(),
        enumeration: enum_shard.clone(),
        monte_carlo: mc(Event::ShardFaulty),
    }];
    let quorum = config.shard_quorum();
    for report in &reports {
        let all = |p: &ExactProb| exact_all_shards(p, config.shard_count, quorum, report.mode);
        rows.push(CompareRow {
            event: Event::AllShardsFaulty,
            mode: Some(report.mode),
            analytic: report.p_all_shards,
            exact: all(&exact_shard)?,
            enumeration: enum_shard.as_ref().map(all).transpose()?,
            monte_carlo: mc(Event::AllShardsFaulty),
        });
    }
    rows.push(CompareRow {
        event: Event::BeaconFaulty,
        mode: None,
        analytic: first.p_beacon,
        exact: exact_beacon.clone(),
        enumeration: enum_beacon.clone(),
        monte_carlo: mc(Event::BeaconFaulty),
    });
    for report in &reports {
        let conquer = |shard: &ExactProb, beacon: &ExactProb| -> Result<ExactProb> {
            let all = exact_all_shards(shard, config.shard_count, quorum, report.mode)?;
            Ok(shard.mul(&all).mul(beacon))
        };
        let enumeration = match (&enum_shard, &enum_beacon) {
            (Some(s), Some(b)) => Some(conquer(s, b)?),
            _ => None,
        };
        rows.push(CompareRow {
            event: Event::Conquered,
            mode: Some(report.mode),
            analytic: report.p_conquer,
            exact: conquer(&exact_shard, &exact_beacon)?,
            enumeration,
            monte_carlo: mc(Event::Conquered),
        });
    }
    Ok(rows)
}

pub fn run(common: &CommonArgs, args: &CompareArgs, io: &mut Io<'_>) -> Result<()> {
    let config = load_config(common, None, io)?;
    let ci = common.ci.unwrap_or(DEFAULT_CI);
    if !(ci > 0.0 && ci < 1.0) {
        return Err(CliError::Usage(format!("--ci {ci} is outside (0, 1)")));
    }
    let trials = common.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = common.seed.unwrap_or(0);
    let rows = compare(
        &config,
        &modes_or(common, &Mode::ALL),
        trials,
        seed,
        ci,
        Executor::Parallel { workers: args.workers },
    )?;

    let mut out = String::new();
    out.push_str(&format!(
        "{:<18} {:<9} {:>12} {:>12} {:>17} {:>12} {:>27}  {:<17} {}\n",
        "event", "mode", "analytic", "exact", "enumeration", "monte_carlo", "interval", "exact", "monte carlo"
    ));
    for row in &rows {
        let enumeration = row.enumeration.as_ref().map_or("skipped (budget)".to_owned(), |e| format::sig6(e.to_f64()));
        let (mc, interval) = match &row.monte_carlo {
            Some((p, ci)) => (format::sig6(*p), format!("[{}, {}]", format::sig6(ci.lower), format::sig6(ci.upper))),
            None => ("-".to_owned(), "-".to_owned()),
        };
        out.push_str(&format!(
            "{:<18} {:<9} {:>12} {:>12} {:>17} {:>12} {:>27}  {:<17} {}\n",
            row.event.as_str(),
            row.mode_label(),
            format::prob(row.analytic),
            format::sig6(row.exact.to_f64()),
            enumeration,
            mc,
            interval,
            row.exact_verdict(),
            row.mc_verdict(),
        ));
    }
    out.push_str(&format!("trials {trials}, seed {seed}, ci {ci}\n"));
    io.stdout.write_all(out.as_bytes()).map_err(CliError::stdout)?;

    if let Some(path) = &common.out {
        let records: Vec<Vec<String>> = rows.iter().map(CompareRow::to_record).collect();
        emit_csv(Some(path), &COMPARE_HEADER, &records, io)?;
    }
    Ok(())
}

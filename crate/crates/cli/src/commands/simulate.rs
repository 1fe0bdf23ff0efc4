use std::fs::OpenOptions;

use clap::Args;

use shardsec_core::analytic::p_conquer;
use shardsec_core::sim::{estimate_with, Event, Executor, TrialTally};
use shardsec_core::{Mode, SecurityReport};

use crate::{format, load_config, CliError, CommonArgs, Io, Result, DEFAULT_CI, DEFAULT_TRIALS};

pub const SIMULATE_HEADER: [&str; 10] =
    ["event", "mode", "trials", "seed", "ci_level", "count", "estimate", "ci_lower", "ci_upper", "analytic"];

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// shard-faulty, all-shards-faulty, beacon-faulty or conquered.
    #[arg(long, default_value = "conquered")]
    pub event: Event,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

/// Analytic counterpart of a simulated event.
pub fn analytic_value(report: &SecurityReport, event: Event) -> shardsec_core::LogProb {
    match event {
        Event::ShardFaulty => report.p_shard,
        Event::AllShardsFaulty => report.p_all_shards,
        Event::BeaconFaulty => report.p_beacon,
        Event::Conquered => report.p_conquer,
    }
}

pub fn record(tally: &TrialTally, mode: Mode, analytic: shardsec_core::LogProb) -> Vec<String> {
    let event = tally.event;
    let ci = tally.interval(event);
    vec![
        event.to_string(),
        mode.to_string(),
        tally.trials.to_string(),
        tally.seed.to_string(),
        tally.ci_level.to_string(),
        tally.count(event).to_string(),
        format::sig6(tally.estimate(event)),
        format::sig6(ci.lower),
        format::sig6(ci.upper),
        format::prob(analytic),
    ]
}

pub fn run(common: &CommonArgs, args: &SimulateArgs, io: &mut Io<'_>) -> Result<()> {
    let config = load_config(common, None, io)?;
    let mode = common.mode.unwrap_or(Mode::PaperFaithful);
    let trials = common.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = common.seed.unwrap_or(0);
    let ci = common.ci.unwrap_or(DEFAULT_CI);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".to_owned()));
    }
    if !(ci > 0.0 && ci < 1.0) {
        return Err(CliError::Usage(format!("--ci {ci} is outside (0, 1)")));
    }

    let tally = estimate_with(&config, args.event, trials, seed, ci, Executor::Parallel { workers: args.workers })?;
    let analytic = analytic_value(&p_conquer(&config, mode)?, args.event);
    let event = args.event;
    let interval = tally.interval(event);

    let mut lines = vec![
        format!("{:<10}{}", "event", event),
        format!("{:<10}{}", "trials", trials),
        format!("{:<10}{}", "seed", seed),
        format!("{:<10}{}", "count", tally.count(event)),
        format!("{:<10}{}", "estimate", format::sig6(tally.estimate(event))),
        format!(
            "{:<10}[{}, {}] at {ci}",
            "interval",
            format::sig6(interval.lower),
            format::sig6(interval.upper)
        ),
        format!("{:<10}{} ({mode})", "analytic", format::prob(analytic)),
        String::from("all events:"),
    ];
    for e in Event::ALL {
        lines.push(format!("  {:<18}{:>10}  {}", e.as_str(), tally.count(e), format::sig6(tally.estimate(e))));
    }
    for line in lines {
        writeln!(io.stdout, "{line}").map_err(CliError::stdout)?;
    }

    if let Some(path) = &common.out {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| CliError::io(path, e))?;
        let fresh = file.metadata().map_err(|e| CliError::io(path, e))?.len() == 0;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            writer.write_record(SIMULATE_HEADER).map_err(|e| CliError::csv(path, e))?;
        }
        writer.write_record(record(&tally, mode, analytic)).map_err(|e| CliError::csv(path, e))?;
        writer.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

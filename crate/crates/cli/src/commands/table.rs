use std::path::PathBuf;

use clap::Args;

use shardsec_core::analytic::p_conquer;
use shardsec_core::params::RawConfig;
use shardsec_core::{Mode, NetworkConfig};

use crate::reference::{Reference, TABLE};
use crate::{emit_csv, format, modes_or, read_raw, CommonArgs, Io, Result};

pub const TABLE_HEADER: [&str; 11] = [
    "scenario",
    "p_m",
    "mode",
    "n",
    "n_prime",
    "p_conquer",
    "log10_p_conquer",
    "years_to_fail",
    "paper_P",
    "paper_Yf",
    "note",
];

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Committee sizes `n,n'` for scenario 1 (no published values exist).
    #[arg(long, value_name = "N,N'", value_parser = parse_pair)]
    pub scenario1_committees: (u64, u64),

    /// Committee sizes `n,n'` for scenario 2.
    #[arg(long, value_name = "N,N'", value_parser = parse_pair)]
    pub scenario2_committees: (u64, u64),

    /// Config file layered over the built-in scenario 1.
    #[arg(long, value_name = "PATH")]
    pub scenario1: Option<PathBuf>,

    /// Config file layered over the built-in scenario 2.
    #[arg(long, value_name = "PATH")]
    pub scenario2: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `n,n'`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub scenario: u8,
    pub config: NetworkConfig,
    pub mode: Mode,
    pub report: shardsec_core::SecurityReport,
    pub reference: Reference,
}

impl TableRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            self.reference.malicious_fraction.to_string(),
            self.mode.to_string(),
            self.config.shard_committee_size.to_string(),
            self.config.beacon_committee_size.to_string(),
            format::prob(self.report.p_conquer),
            format::log10(self.report.p_conquer),
            format::years(self.report.years_to_fail),
            self.reference.p.to_owned(),
            self.reference.years_to_fail.to_owned(),
            self.reference.note(),
        ]
    }
}

fn scenario_base(file: Option<&PathBuf>, builtin: NetworkConfig, sets: &[String]) -> Result<RawConfig> {
    let mut raw = RawConfig::from(&builtin);
    if let Some(path) = file {
        raw.merge(&read_raw(path)?);
    }
    for assignment in sets {
        raw.set(assignment)?;
    }
    Ok(raw)
}

/// Builds every table row for both scenarios: four adversary shares times
/// the selected modes.
pub fn rows(
    scenarios: [(u8, RawConfig, (u64, u64)); 2],
    modes: &[Mode],
    io: &mut Io<'_>,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (scenario, raw, (n, n_prime)) in scenarios {
        for reference in TABLE.iter().filter(|r| r.scenario == scenario) {
            let mut raw = raw.clone();
            raw.set(&format!("shard_committee_size={n}"))?;
            raw.set(&format!("beacon_committee_size={n_prime}"))?;
            raw.set(&format!("malicious_fraction={}", reference.malicious_fraction))?;
            let (config, warnings) = raw.build_validated()?;
            io.warn(&warnings);
            for &mode in modes {
                rows.push(TableRow {
                    scenario,
                    config: config.clone(),
                    mode,
                    report: p_conquer(&config, mode)?,
                    reference: *reference,
                });
            }
        }
    }
    Ok(rows)
}

pub fn run(common: &CommonArgs, args: &TableArgs, io: &mut Io<'_>) -> Result<()> {
    let (n1, n1p) = args.scenario1_committees;
    let (n2, n2p) = args.scenario2_committees;
    let s1 = scenario_base(args.scenario1.as_ref(), NetworkConfig::scenario_one(n1, n1p, 0.1), &common.set)?;
    let s2 = scenario_base(args.scenario2.as_ref(), NetworkConfig::scenario_two(n2, n2p, 0.1), &common.set)?;
    let modes = modes_or(common, &Mode::ALL);
    let table = rows([(1, s1, (n1, n1p)), (2, s2, (n2, n2p))], &modes, io)?;
    let records: Vec<Vec<String>> = table.iter().map(TableRow::to_record).collect();
    emit_csv(common.out.as_deref(), &TABLE_HEADER, &records, io)
}

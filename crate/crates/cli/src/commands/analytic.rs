
use shardsec_core::analytic::p_conquer;
use shardsec_core::{LogProb, Mode};

use super::{report_row, REPORT_HEADER};
use crate::{emit_csv, format, load_config, CliError, CommonArgs, Io, Result};

pub fn run(common: &CommonArgs, io: &mut Io<'_>) -> Result<()> {
    let config = load_config(common, None, io)?;
    let mode = common.mode.unwrap_or(Mode::PaperFaithful);
    let report = p_conquer(&config, mode)?;

    let line = |name: &str, p: LogProb| format!("{name:<14}{:>14}  log10 {}", format::prob(p), format::log10(p));
    let text = [
        format!("{:<14}{:>14}", "mode", mode.as_str()),
        line("p_shard", report.p_shard),
        line("p_all_shards", report.p_all_shards),
        line("p_beacon", report.p_beacon),
        line("p_conquer", report.p_conquer),
        format!("{:<14}{:>14}", "years_to_fail", format::years(report.years_to_fail)),
    ];
    for l in text {
        writeln!(io.stdout, "{l}").map_err(CliError::stdout)?;
    }

    if let Some(path) = &common.out {
        let row = report_row(config.shard_committee_size, config.malicious_fraction, &report);
        emit_csv(Some(path), &REPORT_HEADER, &[row], io)?;
    }
    Ok(())
}

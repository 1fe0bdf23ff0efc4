pub mod analytic;
pub mod compare;
pub mod simulate;
pub mod sweep;
pub mod table;

use shardsec_core::SecurityReport;

use crate::format;

/// Columns shared by `analytic --out` and `sweep`.
pub const REPORT_HEADER: [&str; 12] = [
    "n",
    "R",
    "mode",
    "p_shard",
    "p_all_shards",
    "p_beacon",
    "p_conquer",
    "log10_p_shard",
    "log10_p_all_shards",
    "log10_p_beacon",
    "log10_p_conquer",
    "years_to_fail",
];

pub fn report_row(n: u64, r: f64, report: &SecurityReport) -> Vec<String> {
    vec![
        n.to_string(),
        r.to_string(),
        report.mode.to_string(),
        format::prob(report.p_shard),
        format::prob(report.p_all_shards),
        format::prob(report.p_beacon),
        format::prob(report.p_conquer),
        format::log10(report.p_shard),
        format::log10(report.p_all_shards),
        format::log10(report.p_beacon),
        format::log10(report.p_conquer),
        format::years(report.years_to_fail),
    ]
}

//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any failed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shardsec::commands::compare::compare;
use shardsec::commands::sweep::DEFAULT_FRACTIONS;
use shardsec::reference::{TABLE, YF_TOLERANCE};
use shardsec::{SweepSpec, Varying};
use shardsec_core::analytic::{p_all_shards_faulty, p_conquer, p_shard_faulty, years_to_fail};
use shardsec_core::oracle::{enumerate_committees, exact_conquer, exact_hypergeom_tail, ExactProb};
use shardsec_core::params::committee_threshold;
use shardsec_core::sim::{estimate_with, Event, Executor};
use shardsec_core::{LogProb, Mode, NetworkConfig, Pool};

const REL_TOL: f64 = 1e-10;
const MC_TRIALS: u64 = 1_000_000;
const MC_LEVEL: f64 = 0.99;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rel_agrees(a: LogProb, e: &ExactProb) -> bool {
    match (a.is_zero(), e.is_zero()) {
        (true, true) => true,
        (false, false) => (a.ln() - e.ln()).exp_m1().abs() <= REL_TOL,
        _ => false,
    }
}

fn network(shards: u64, pool: u64, beacon_pool: u64, n: u64, n_prime: u64, malicious_fraction: f64) -> NetworkConfig {
    NetworkConfig {
        total_nodes: shards * pool + beacon_pool,
        shard_count: shards,
        shard_pool_size: pool,
        beacon_pool_size: beacon_pool,
        shard_committee_size: n,
        beacon_committee_size: n_prime,
        malicious_fraction,
        resiliency: 1.0 / 3.0,
        beacon_resiliency: None,
        epochs_per_year: 365.0,
    }
}

fn yf_identity() -> Verdict {
    let mut failures = Vec::new();
    let mut anomaly = None;
    for row in TABLE.iter().filter(|r| r.p_value() > 0.0) {
        let computed = years_to_fail(LogProb::from_prob(row.p_value()).expect("probability"), 365.0);
        let rel = (computed / row.years_value() - 1.0).abs();
        if (row.scenario, row.malicious_fraction) == (1, 0.20) {
            anomaly = Some(row.years_value() / computed);
        } else if rel > YF_TOLERANCE {
            failures.push(format!("{}/{}: rel {rel:.2e}", row.scenario, row.malicious_fraction));
        }
    }
    let factor = anomaly.unwrap_or(f64::NAN);
    let anomaly_ok = (factor / 100.0 - 1.0).abs() < 0.05;

    let out = Command::new(env!("CARGO_BIN_EXE_shardsec"))
        .args(["table", "--scenario1-committees", "30,60", "--scenario2-committees", "30,60"])
        .output()
        .expect("table runs");
    let csv = String::from_utf8_lossy(&out.stdout);
    let surfaced = out.status.success()
        && csv
            .lines()
            .filter(|l| l.starts_with("1,0.2,"))
            .all(|l| l.contains("disagrees with 1/(365*P)"))
        && csv.lines().filter(|l| l.contains("disagrees")).count() == 2;

    verdict(
        failures.is_empty() && anomaly_ok && surfaced,
        format!(
            "6 pairs within {}%{}; 1.58E-18 pair off by factor {factor:.1}; table note {}",
            YF_TOLERANCE * 100.0,
            if failures.is_empty() { String::new() } else { format!(" except {failures:?}") },
            if surfaced { "present" } else { "MISSING" }
        ),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut checked = 0u64;
    let mut zeros = 0u64;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for v in 1..=60u64 {
        for m in 0..=v {
            let pool = Pool::new(v - m, m);
            for n in 0..=v {
                let k = committee_threshold(n, 1.0 / 3.0);
                let analytic = p_shard_faulty(pool, n, k);
                let exact = exact_hypergeom_tail(pool, n, k);
                checked += 1;
                match (analytic, exact) {
                    (Ok(a), Ok(e)) => {
                        if e.is_zero() {
                            zeros += 1;
                        }
                        if !a.is_zero() && !e.is_zero() {
                            worst = worst.max((a.ln() - e.ln()).exp_m1().abs());
                        }
                        if !rel_agrees(a, &e) && failures.len() < 5 {
                            failures.push(format!("{pool} n={n}: {} vs {e}", a.prob()));
                        }
                    }
                    (a, e) => failures.push(format!("{pool} n={n}: {a:?} / {e:?}")),
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{checked} tails, {zeros} exact zeros, worst relative error {worst:.2e}{}", fmt_failures(&failures)),
    )
}

fn fmt_failures(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; failures: {failures:?}")
    }
}

fn brute_force_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    while checked < 250 {
        let v = rng.random_range(1..=36u64);
        let m = rng.random_range(0..=v);
        let n = rng.random_range(0..=v);
        let k = rng.random_range(0..=n + 1);
        let pool = Pool::new(v - m, m);
        let enumerated = match enumerate_committees(pool, n, k) {
            Ok(p) => p,
            Err(shardsec_core::Error::BudgetExceeded { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => {
                failures.push(format!("{pool} n={n} k={k}: {e}"));
                checked += 1;
                continue;
            }
        };
        let exact = exact_hypergeom_tail(pool, n, k).expect("valid instance");
        if enumerated != exact {
            failures.push(format!("{pool} n={n} k={k}: {enumerated} vs {exact}"));
        }
        checked += 1;
    }
    verdict(
        failures.is_empty(),
        format!("{checked} instances identical, {skipped} draws over budget redrawn{}", fmt_failures(&failures)),
    )
}

struct Calibration {
    config: NetworkConfig,
    event: Event,
    analytic: f64,
}

/// Small configs whose event probability lies in [1e-3, 0.5]. Only events
/// whose analytic value is the true frequency are used: a single committee,
/// or the all-shards count under the binomial form.
fn calibration_set() -> Vec<Calibration> {
    let events = [Event::ShardFaulty, Event::BeaconFaulty, Event::AllShardsFaulty];
    let mut set = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    while set.len() < 20 {
        let event = events[set.len() % events.len()];
        let pool = rng.random_range(6..=40u64);
        let n = rng.random_range(3..=pool.min(24));
        let fraction = rng.random_range(1..=8u32) as f64 / 20.0;
        let shards = rng.random_range(2..=5u64);
        let config = network(shards, pool, pool, n, n, fraction);
        let report = p_conquer(&config, Mode::BinomialCorrected).expect("valid config");
        let analytic = match event {
            Event::ShardFaulty => report.p_shard,
            Event::BeaconFaulty => report.p_beacon,
            _ => report.p_all_shards,
        }
        .prob();
        if (1e-3..=0.5).contains(&analytic) {
            set.push(Calibration { config, event, analytic });
        }
    }
    set
}

fn monte_carlo_calibration() -> Verdict {
    let set = calibration_set();
    let run = |executor: Executor| -> Vec<String> {
        set.iter()
            .enumerate()
            .map(|(i, c)| {
                let tally = estimate_with(&c.config, c.event, MC_TRIALS, i as u64, MC_LEVEL, executor).expect("runs");
                format!("{tally:?}")
            })
            .collect()
    };
    let first = run(Executor::Parallel { workers: 0 });
    let mut covered = 0;
    let mut misses = Vec::new();
    for (i, c) in set.iter().enumerate() {
        let tally = estimate_with(&c.config, c.event, MC_TRIALS, i as u64, MC_LEVEL, Executor::Parallel { workers: 0 })
            .expect("runs");
        let ci = tally.interval(c.event);
        if ci.contains(c.analytic) {
            covered += 1;
        } else {
            misses.push(format!("#{i} {} {:.5e} not in [{:.5e}, {:.5e}]", c.event, c.analytic, ci.lower, ci.upper));
        }
    }
    let rerun = run(Executor::Sequential);
    let identical = first == rerun;
    verdict(
        covered >= 19 && identical,
        format!(
            "{covered}/20 covered at 99%; rerun {}{}",
            if identical { "byte-identical" } else { "DIFFERS" },
            fmt_failures(&misses)
        ),
    )
}

fn figure_trends() -> Verdict {
    let base = NetworkConfig::scenario_one(3, 3, 0.1);
    let spec = SweepSpec {
        varying: Varying::ShardCommitteeSize,
        values: (1..=base.shard_pool_size / 3).map(|i| (3 * i) as f64).collect(),
        fractions: DEFAULT_FRACTIONS.to_vec(),
        base,
        modes: vec![Mode::PaperFaithful],
    };
    let rows = spec.rows().expect("sweep evaluates");
    let curve = |r: f64| -> Vec<(u64, f64)> {
        rows.iter().filter(|row| row.r == r).map(|row| (row.n, row.report.p_shard.log10())).collect()
    };
    let curves: Vec<Vec<(u64, f64)>> = DEFAULT_FRACTIONS.iter().map(|&r| curve(r)).collect();

    let monotone = curves.iter().all(|c| c.windows(2).all(|w| w[1].1 <= w[0].1));
    let ordered = (0..curves[0].len()).all(|i| curves.windows(2).all(|pair| pair[0][i].1 <= pair[1][i].1));

    // Every curve eventually underflows to exactly zero once n outgrows the
    // malicious pool, so the drop is measured over the range where all three
    // are still positive.
    let common = (0..curves[0].len()).take_while(|&i| curves.iter().all(|c| c[i].1.is_finite())).count();
    let drops: Vec<f64> = curves.iter().map(|c| c[0].1 - c[common - 1].1).collect();
    let fastest = drops[0] > drops[1] && drops[0] > drops[2];
    let zero_at: Vec<u64> = curves
        .iter()
        .map(|c| c.iter().find(|p| p.1 == f64::NEG_INFINITY).map_or(0, |p| p.0))
        .collect();

    verdict(
        monotone && ordered && fastest,
        format!(
            "non-increasing {monotone}, ordered by R {ordered}; log10 drop over n=3..{} is {:.2}/{:.2}/{:.2} for R=0.1/0.15/0.2; exact zero from n={:?}",
            curves[0][common - 1].0,
            drops[0],
            drops[1],
            drops[2],
            zero_at
        ),
    )
}

fn mode_experiment() -> Verdict {
    // V=10, M=3, n=3 gives p = 11/60 per shard; three shards, two needed.
    let config = network(3, 10, 10, 3, 3, 0.3);
    let paper = p_conquer(&config, Mode::PaperFaithful).unwrap().p_all_shards.prob();
    let by_hand = p_all_shards_faulty(LogProb::from_prob(11.0 / 60.0).unwrap(), 3, 2, Mode::PaperFaithful).unwrap().prob();
    let corrected = p_conquer(&config, Mode::BinomialCorrected).unwrap().p_all_shards.prob();
    let gap = corrected / paper - 1.0;

    let rows = compare(&config, &Mode::ALL, MC_TRIALS, 6, MC_LEVEL, Executor::default()).expect("compare runs");
    let all: Vec<_> = rows.iter().filter(|r| r.event == Event::AllShardsFaulty).collect();
    let by_mode = |m: Mode| all.iter().find(|r| r.mode == Some(m)).expect("row per mode");
    let (p_row, c_row) = (by_mode(Mode::PaperFaithful), by_mode(Mode::BinomialCorrected));
    let (estimate, ci) = c_row.monte_carlo.expect("trials run");

    let pass = gap >= 0.10
        && all.len() == 2
        && c_row.mc_verdict() == "within CI"
        && p_row.mc_verdict() == "outside CI"
        && (by_hand - paper).abs() <= paper * REL_TOL
        && (p_row.analytic.prob() - paper).abs() <= paper * REL_TOL;
    verdict(
        pass,
        format!(
            "paper {paper:.5e}, corrected {corrected:.5e} (gap {:.0}%); MC {estimate:.5e} in [{:.5e}, {:.5e}]; compare: corrected {}, paper {}",
            gap * 100.0,
            ci.lower,
            ci.upper,
            c_row.mc_verdict(),
            p_row.mc_verdict()
        ),
    )
}

fn tiny_analytic() -> Verdict {
    let config = network(3, 6, 6, 3, 3, 1.0 / 3.0);
    let mut details = Vec::new();
    let mut pass = true;
    for mode in Mode::ALL {
        let analytic = p_conquer(&config, mode).unwrap().p_conquer;
        let exact = exact_conquer(&config, mode).unwrap();
        pass &= rel_agrees(analytic, &exact);
        details.push(format!("{mode}: {:.6e} vs {exact}", analytic.prob()));
    }
    verdict(pass, details.join("; "))
}

fn tiny_monte_carlo() -> Verdict {
    let config = network(3, 6, 6, 3, 3, 1.0 / 3.0);
    let tally = estimate_with(&config, Event::Conquered, MC_TRIALS, 7, MC_LEVEL, Executor::default()).unwrap();
    let ci = tally.interval(Event::Conquered);
    let mut details = Vec::new();
    let mut pass = true;
    for mode in Mode::ALL {
        let p = p_conquer(&config, mode).unwrap().p_conquer.prob();
        let covered = ci.contains(p);
        pass &= covered;
        details.push(format!("{mode} {p:.5e} {}", if covered { "covered" } else { "not covered" }));
    }
    // Joint probability of the simulated conjunction: shard 0 faulty (1/5),
    // then at least one of the two remaining shards faulty (9/25), then the
    // beacon (1/5).
    let joint = 0.2 * 0.36 * 0.2;
    details.push(format!(
        "MC {:.5e} in [{:.5e}, {:.5e}]; true joint {joint:.5e} {}",
        tally.estimate(Event::Conquered),
        ci.lower,
        ci.upper,
        if ci.contains(joint) { "covered" } else { "not covered" }
    ));
    verdict(pass, details.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1  Y_f identity against published table", yf_identity),
        ("2  log-domain tails equal exact rationals, V <= 60", oracle_equivalence),
        ("3  enumeration equals exact tail on random instances", brute_force_equivalence),
        ("4  Monte Carlo calibration, 20 configs", monte_carlo_calibration),
        ("5  committee-size trends, V = 200", figure_trends),
        ("6  all-shards mode experiment", mode_experiment),
        ("7a tiny instance, analytic equals exact", tiny_analytic),
        ("7b tiny instance, Monte Carlo covers analytic", tiny_monte_carlo),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name} [{secs:.1}s]: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Exact (Clopper–Pearson) binomial confidence intervals.

use statrs::function::factorial::ln_binomial;

use crate::analytic::log_sum_exp;

/// Terms this far (in natural log units) below the largest one are dropped
/// from a tail sum.
const TAIL_CUTOFF: f64 = 50.0;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Two-sided Clopper–Pearson interval for `successes` out of `trials` at
/// confidence `level`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Interval {
    assert!(trials > 0 && successes <= trials, "need 0 <= successes <= trials, trials > 0");
    assert!(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    let ln_half_alpha = ((1.0 - level) / 2.0).ln();
    let point = successes as f64 / trials as f64;

    let lower = if successes == 0 {
        0.0
    } else {
        // P(X >= x | p) rises with p.
        bisect(0.0, point, |p| ln_upper_tail(trials, successes, p) < ln_half_alpha)
    };
    let upper = if successes == trials {
        1.0
    } else {
        // P(X <= x | p) falls with p.
        bisect(point, 1.0, |p| ln_lower_tail(trials, successes, p) > ln_half_alpha)
    };
    Interval { lower, upper }
}

/// Narrows `[lo, hi]` onto the point where `below_root` switches from true
/// to false.
fn bisect(mut lo: f64, mut hi: f64, below_root: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below_root(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_pmf(n: u64, k: u64, ln_p: f64, ln_q: f64) -> f64 {
    ln_binomial(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q
}

fn binomial_mode(n: u64, p: f64) -> u64 {
    (((n + 1) as f64 * p).floor() as u64).min(n)
}

/// Sums pmf terms walking away from the mode, starting at `start`.
fn sum_away_from_mode(n: u64, start: u64, upward: bool, ln_p: f64, ln_q: f64) -> f64 {
    let mut terms = Vec::new();
    let mut k = start;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let t = ln_pmf(n, k, ln_p, ln_q);
        peak = peak.max(t);
        terms.push(t);
        if t < peak - TAIL_CUTOFF {
            break;
        }
        match (upward, k) {
            (true, k2) if k2 == n => break,
            (false, 0) => break,
            (true, _) => k += 1,
            (false, _) => k -= 1,
        }
    }
    log_sum_exp(&mut terms)
}

/// `ln P(X >= x)` for `X ~ Binomial(n, p)`.
pub(crate) fn ln_upper_tail(n: u64, x: u64, p: f64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    if x > binomial_mode(n, p) {
        sum_away_from_mode(n, x, true, ln_p, ln_q)
    } else {
        crate::analytic::LogProb::from_ln(sum_away_from_mode(n, x - 1, false, ln_p, ln_q).min(0.0))
            .expect("tail is a probability")
            .complement()
            .ln()
    }
}

/// `ln P(X <= x)` for `X ~ Binomial(n, p)`.
pub(crate) fn ln_lower_tail(n: u64, x: u64, p: f64) -> f64 {
    if x >= n {
        return 0.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    if x < binomial_mode(n, p) {
        sum_away_from_mode(n, x, false, ln_p, ln_q)
    } else {
        crate::analytic::LogProb::from_ln(sum_away_from_mode(n, x + 1, true, ln_p, ln_q).min(0.0))
            .expect("tail is a probability")
            .complement()
            .ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.stats.beta.ppf.
    #[test]
    fn matches_beta_quantiles() {
        let cases = [
            (0, 10, 0.95, 0.0, 0.3084971078187608),
            (5, 10, 0.95, 0.18708602844739855, 0.8129139715526015),
            (10, 10, 0.95, 0.6915028921812392, 1.0),
            (183, 1000, 0.99, 0.1525832612251821, 0.21649072983440204),
            (183_333, 1_000_000, 0.99, 0.1823373190199972, 0.1843316955949144),
        ];
        for (x, n, level, lo, hi) in cases {
            let ci = clopper_pearson(x, n, level);
            assert!((ci.lower - lo).abs() < 1e-9, "{x}/{n}: lower {} vs {lo}", ci.lower);
            assert!((ci.upper - hi).abs() < 1e-9, "{x}/{n}: upper {} vs {hi}", ci.upper);
        }
    }

    #[test]
    fn tails_by_direct_summation() {
        let (n, p) = (30u64, 0.27f64);
        let pmf = |k: u64| ln_pmf(n, k, p.ln(), (1.0 - p).ln()).exp();
        for x in 0..=n {
            let upper: f64 = (x..=n).map(pmf).sum();
            let lower: f64 = (0..=x).map(pmf).sum();
            assert!((ln_upper_tail(n, x, p).exp() - upper).abs() < 1e-13, "x={x}");
            assert!((ln_lower_tail(n, x, p).exp() - lower).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn interval_brackets_point_estimate() {
        for x in [0u64, 1, 7, 500, 999, 1000] {
            let ci = clopper_pearson(x, 1000, 0.99);
            let point = x as f64 / 1000.0;
            assert!(ci.lower <= point && point <= ci.upper);
            assert!((0.0..=1.0).contains(&ci.lower) && (0.0..=1.0).contains(&ci.upper));
        }
    }
}

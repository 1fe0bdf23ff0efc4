use std::cmp::Ordering;
use std::fmt;

/// Slack allowed above `ln 1` before a value is rejected rather than
/// clamped to certainty.
const LN_ONE_SLACK: f64 = 1e-12;

/// A probability stored as its natural logarithm.
///
/// `ln_value == -inf` is the exact-zero sentinel; it orders below every
/// finite value. Values are kept at or below `ln 1 = 0`: rounding noise up
/// to `1e-12` above zero is clamped back to certainty.
#[derive(Clone, Copy, PartialEq)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a natural-log value. Returns `None` for NaN or for values
    /// meaningfully above zero.
    pub fn from_ln(ln_value: f64) -> Option<Self> {
        if ln_value.is_nan() || ln_value > LN_ONE_SLACK {
            None
        } else {
            Some(Self(ln_value.min(0.0)))
        }
    }

    pub fn from_prob(p: f64) -> Option<Self> {
        if (0.0..=1.0).contains(&p) {
            Some(Self(p.ln()))
        } else {
            None
        }
    }

    pub(crate) fn from_ln_clamped(ln_value: f64) -> Self {
        debug_assert!(!ln_value.is_nan());
        Self(ln_value.min(0.0))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log10(self) -> f64 {
        self.0 / std::f64::consts::LN_10
    }

    /// Probability-domain value; underflows to 0.0 below roughly 1e-308
    /// even when the log value is finite.
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_one(self) -> bool {
        self.0 == 0.0
    }

    /// Product of two probabilities.
    pub fn mul(self, other: LogProb) -> LogProb {
        LogProb(self.0 + other.0)
    }

    /// Product of several probabilities. Factors are summed in a canonical
    /// order, so the result does not depend on the order they are given in.
    pub fn product(factors: &[LogProb]) -> LogProb {
        let mut sorted: Vec<f64> = factors.iter().map(|f| f.0).collect();
        sorted.sort_by(f64::total_cmp);
        LogProb(sorted.into_iter().sum::<f64>().min(0.0))
    }

    pub fn powi(self, exponent: u64) -> LogProb {
        if exponent == 0 {
            LogProb::ONE
        } else {
            LogProb(self.0 * exponent as f64)
        }
    }

    /// `1 - p`, evaluated without cancellation on either side of 1/2.
    pub fn complement(self) -> LogProb {
        LogProb(log1mexp(self.0))
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogProb(ln={})", self.0)
    }
}

impl PartialOrd for LogProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for LogProb {}

impl Ord for LogProb {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `ln(1 - exp(x))` for `x <= 0`.
pub(crate) fn log1mexp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x >= 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Stable `ln(sum(exp(terms)))`. Terms are accumulated from the largest
/// down so that the relative error stays bounded however long the tail is.
pub fn log_sum_exp(terms: &mut [f64]) -> f64 {
    terms.sort_by(|a, b| b.total_cmp(a));
    let Some(&max) = terms.first() else {
        return f64::NEG_INFINITY;
    };
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let scaled: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + scaled.ln()
}

/// Probability-domain sum of two values, clamped at certainty.
impl std::ops::Add for LogProb {
    type Output = LogProb;

    fn add(self, rhs: LogProb) -> LogProb {
        LogProb::from_ln_clamped(log_sum_exp(&mut [self.0, rhs.0]))
    }
}

impl std::iter::Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> LogProb {
        let mut terms: Vec<f64> = iter.map(|p| p.0).collect();
        LogProb::from_ln_clamped(log_sum_exp(&mut terms))
    }
}

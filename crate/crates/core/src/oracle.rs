//! Exact reference values.
//!
//! [`exact_hypergeom_tail`] evaluates committee tails as rationals over
//! arbitrary-precision integers and works at any scale.
//! [`enumerate_committees`] walks every committee one by one and is the
//! independent brute-force check on tiny pools. Neither shares code with
//! the log-domain engine in [`crate::analytic`].

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::analytic::{LogProb, Mode};
use crate::error::{domain, Error, Result};
use crate::params::{ConfigError, NetworkConfig, Pool, Violation};

/// Largest number of committees [`enumerate_committees`] will visit.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

/// An exact probability in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactProb {
    numerator: BigUint,
    denominator: BigUint,
}

impl ExactProb {
    /// Reduces `numerator / denominator`. Fails on a zero denominator or a
    /// ratio above one.
    pub fn new(numerator: BigUint, denominator: BigUint) -> Result<Self> {
        if denominator.is_zero() {
            return Err(domain("exact probability with zero denominator"));
        }
        if numerator > denominator {
            return Err(domain("exact probability above one"));
        }
        Ok(Self::reduced(numerator, denominator))
    }

    fn reduced(numerator: BigUint, denominator: BigUint) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let g = numerator.gcd(&denominator);
        Self { numerator: numerator / &g, denominator: denominator / g }
    }

    pub fn zero() -> Self {
        Self { numerator: BigUint::zero(), denominator: BigUint::one() }
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), denominator: BigUint::one() }
    }

    pub fn from_u64(numerator: u64, denominator: u64) -> Result<Self> {
        Self::new(numerator.into(), denominator.into())
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn mul(&self, other: &ExactProb) -> ExactProb {
        Self::reduced(&self.numerator * &other.numerator, &self.denominator * &other.denominator)
    }

    /// Natural log, accurate to a few ulps even when the value is far below
    /// the smallest positive `f64`.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_biguint(&self.numerator) - ln_biguint(&self.denominator)
        }
    }

    pub fn to_log_prob(&self) -> LogProb {
        LogProb::from_ln(self.ln()).expect("exact probabilities are at most one")
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl fmt::Debug for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactProb({self})")
    }
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().expect("64-bit value");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Exact binomial coefficient; zero when `b > a`.
pub fn exact_choose(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        // acc = C(a, i) at the top of the loop, so the division is exact.
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

fn check_committee(pool: Pool, n: u64) -> Result<()> {
    if n > pool.total() {
        Err(domain(format!("committee size {n} exceeds pool total {}", pool.total())))
    } else {
        Ok(())
    }
}

/// Exact `P(X >= k_min)` for the malicious count `X` of a committee of `n`
/// drawn without replacement from `pool`.
pub fn exact_hypergeom_tail(pool: Pool, n: u64, k_min: u64) -> Result<ExactProb> {
    check_committee(pool, n)?;
    let (honest, malicious) = (pool.honest(), pool.malicious());
    let numerator: BigUint = (k_min..=n.min(malicious))
        .filter(|&k| n - k <= honest)
        .map(|k| exact_choose(malicious, k) * exact_choose(honest, n - k))
        .sum();
    ExactProb::new(numerator, exact_choose(pool.total(), n))
}

/// Counts, by walking every `n`-subset of `pool`, the committees holding at
/// least `k_min` malicious members.
///
/// Validators `0..M` are malicious. Subsets are visited in lexicographic
/// index order; a branch is cut as soon as the malicious validators still
/// reachable cannot lift it to `k_min`.
pub fn enumerate_committees(pool: Pool, n: u64, k_min: u64) -> Result<ExactProb> {
    check_committee(pool, n)?;
    let subsets = exact_choose(pool.total(), n);
    if subsets > BigUint::from(ENUMERATION_BUDGET) {
        return Err(Error::BudgetExceeded { required: subsets.to_string(), limit: ENUMERATION_BUDGET });
    }
    let walker = SubsetWalker { total: pool.total(), malicious: pool.malicious(), k_min };
    let hits = if n == 0 {
        u64::from(k_min == 0)
    } else {
        walker.count_partitioned(n)
    };
    ExactProb::new(hits.into(), subsets)
}

struct SubsetWalker {
    total: u64,
    malicious: u64,
    k_min: u64,
}

impl SubsetWalker {
    fn count(&self, start: u64, slots: u64, hits: u64) -> u64 {
        if slots == 0 {
            return u64::from(hits >= self.k_min);
        }
        let reachable = self.malicious.saturating_sub(start).min(slots);
        if hits + reachable < self.k_min {
            return 0;
        }
        (start..=self.total - slots)
            .map(|first| self.count(first + 1, slots - 1, hits + u64::from(first < self.malicious)))
            .sum()
    }

    fn count_from_first(&self, first: u64, n: u64) -> u64 {
        self.count(first + 1, n - 1, u64::from(first < self.malicious))
    }

    #[cfg(feature = "parallel")]
    fn count_partitioned(&self, n: u64) -> u64 {
        use rayon::prelude::*;
        (0..=self.total - n).into_par_iter().map(|first| self.count_from_first(first, n)).sum()
    }

    #[cfg(not(feature = "parallel"))]
    fn count_partitioned(&self, n: u64) -> u64 {
        (0..=self.total - n).map(|first| self.count_from_first(first, n)).sum()
    }
}

/// Exact all-shards probability for a per-shard failure probability `p`.
/// The `PaperFaithful` sum is capped at one.
pub fn exact_all_shards(p: &ExactProb, shard_count: u64, i_min: u64, mode: Mode) -> Result<ExactProb> {
    if i_min > shard_count {
        return Err(domain(format!("all-shards quorum {i_min} exceeds shard count {shard_count}")));
    }
    let (a, b) = (p.numerator(), p.denominator());
    let exp = |base: &BigUint, e: u64| base.pow(u32::try_from(e).expect("shard count fits in u32"));
    let denominator = exp(b, shard_count);
    let numerator: BigUint = match mode {
        Mode::PaperFaithful => (i_min..=shard_count).map(|i| exp(a, i) * exp(b, shard_count - i)).sum(),
        Mode::BinomialCorrected => {
            let q = b - a;
            (i_min..=shard_count)
                .map(|i| exact_choose(shard_count, i) * exp(a, i) * exp(&q, shard_count - i))
                .sum()
        }
    };
    if numerator > denominator {
        return Ok(ExactProb::one());
    }
    ExactProb::new(numerator, denominator)
}

/// Exact conquering probability on a tiny instance: both committee tails
/// come from [`enumerate_committees`], combined with the exact all-shards
/// term for `mode`.
pub fn exact_conquer(config: &NetworkConfig, mode: Mode) -> Result<ExactProb> {
    let errors: Vec<Violation> = config.validate().into_iter().filter(Violation::is_error).collect();
    if !errors.is_empty() {
        return Err(Error::Config(ConfigError::Invalid(errors)));
    }
    let p_shard = enumerate_committees(config.shard_pool(), config.shard_committee_size, config.shard_threshold())?;
    let p_all = exact_all_shards(&p_shard, config.shard_count, config.shard_quorum(), mode)?;
    let p_beacon =
        enumerate_committees(config.beacon_pool(), config.beacon_committee_size, config.beacon_threshold())?;
    Ok(p_shard.mul(&p_all).mul(&p_beacon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac(n: u64, d: u64) -> ExactProb {
        ExactProb::from_u64(n, d).unwrap()
    }

    fn tiny_config() -> NetworkConfig {
        NetworkConfig {
            total_nodes: 24,
            shard_count: 3,
            shard_pool_size: 6,
            beacon_pool_size: 6,
            shard_committee_size: 3,
            beacon_committee_size: 3,
            malicious_fraction: 1.0 / 3.0,
            resiliency: 1.0 / 3.0,
            beacon_resiliency: None,
            epochs_per_year: 365.0,
        }
    }

    fn pascal_row(a: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..a {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for j in 1..row.len() {
                next[j] = &row[j - 1] + &row[j];
            }
            row = next;
        }
        row
    }

    #[test]
    fn choose_examples() {
        assert_eq!(exact_choose(10, 3), BigUint::from(120u32));
        assert_eq!(exact_choose(0, 0), BigUint::one());
        assert_eq!(exact_choose(3, 4), BigUint::zero());
        let row = pascal_row(200);
        assert_eq!(exact_choose(200, 100), row[100]);
        assert_eq!(exact_choose(200, 100).to_string().len(), 59);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(exact_hypergeom_tail(Pool::new(7, 3), 3, 2).unwrap(), frac(11, 60));
        assert_eq!(exact_hypergeom_tail(Pool::new(17, 23), 12, 0).unwrap(), ExactProb::one());
        assert_eq!(exact_hypergeom_tail(Pool::new(5, 0), 2, 1).unwrap(), ExactProb::zero());
        assert!(exact_hypergeom_tail(Pool::new(5, 0), 6, 1).is_err());
    }

    #[test]
    fn tail_at_realistic_scale() {
        let p = exact_hypergeom_tail(Pool::new(560, 240), 300, 200).unwrap();
        assert!(!p.is_zero());
        assert!(p.ln() < -100.0 && p.ln().is_finite());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_committees(Pool::new(7, 3), 3, 2).unwrap(), frac(22, 120));
        assert_eq!(enumerate_committees(Pool::new(2, 2), 4, 2).unwrap(), ExactProb::one());
        assert_eq!(enumerate_committees(Pool::new(3, 1), 2, 2).unwrap(), ExactProb::zero());
    }

    #[test]
    fn enumeration_refuses_large_instances() {
        let err = enumerate_committees(Pool::new(140, 60), 150, 100).unwrap_err();
        match err {
            Error::BudgetExceeded { required, limit } => {
                assert_eq!(limit, ENUMERATION_BUDGET);
                assert_eq!(required, exact_choose(200, 150).to_string());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exhaustive_equivalence_small_pools() {
        for total in 0..=14u64 {
            for malicious in 0..=total {
                let pool = Pool::new(total - malicious, malicious);
                for n in 0..=total {
                    for k_min in 0..=n + 1 {
                        assert_eq!(
                            enumerate_committees(pool, n, k_min).unwrap(),
                            exact_hypergeom_tail(pool, n, k_min).unwrap(),
                            "{pool} n={n} k={k_min}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn conquer_tiny_instance() {
        assert_eq!(exact_conquer(&tiny_config(), Mode::BinomialCorrected).unwrap(), frac(13, 3125));
        assert_eq!(exact_conquer(&tiny_config(), Mode::PaperFaithful).unwrap(), frac(6, 3125));
    }

    #[test]
    fn conquer_degenerate_cases() {
        let honest = NetworkConfig { malicious_fraction: 0.0, ..tiny_config() };
        for mode in Mode::ALL {
            assert_eq!(exact_conquer(&honest, mode).unwrap(), ExactProb::zero());
        }
        let hostile = NetworkConfig {
            shard_count: 1,
            total_nodes: 12,
            malicious_fraction: 1.0,
            ..tiny_config()
        };
        assert_eq!(hostile.shard_quorum(), 1);
        assert_eq!(exact_conquer(&hostile, Mode::PaperFaithful).unwrap(), ExactProb::one());
    }

    #[test]
    fn paper_mode_is_capped() {
        let got = exact_all_shards(&frac(9, 10), 8, 6, Mode::PaperFaithful).unwrap();
        assert_eq!(got, ExactProb::one());
    }

    #[test]
    fn ln_of_huge_ratios() {
        let p = ExactProb::new(BigUint::one(), BigUint::from(10u32).pow(400)).unwrap();
        assert!((p.ln() - (-400.0 * std::f64::consts::LN_10)).abs() < 1e-12);
        assert_eq!(frac(1, 4).to_f64(), 0.25);
    }

    proptest! {
        #[test]
        fn pascal_rule(a in 1u64..=200, b in 1u64..=200) {
            prop_assert_eq!(exact_choose(a, b), exact_choose(a - 1, b - 1) + exact_choose(a - 1, b));
        }

        #[test]
        fn tail_plus_head_is_one(total in 1u64..120, m_frac in 0.0f64..=1.0, n_frac in 0.0f64..=1.0, k_frac in 0.0f64..=1.0) {
            let malicious = (total as f64 * m_frac) as u64;
            let pool = Pool::new(total - malicious, malicious);
            let n = (total as f64 * n_frac) as u64;
            let k_min = ((n as f64 * k_frac) as u64).max(1);
            let tail = exact_hypergeom_tail(pool, n, k_min).unwrap();
            let head: BigUint = (0..k_min.min(n + 1))
                .filter(|&k| k <= malicious && n - k <= pool.honest())
                .map(|k| exact_choose(malicious, k) * exact_choose(pool.honest(), n - k))
                .sum();
            let denominator = exact_choose(total, n);
            // tail/1 + head/den == 1, compared over the common denominator
            let tail_scaled = tail.numerator() * (&denominator / tail.denominator());
            prop_assert_eq!(tail_scaled + head, denominator);
        }
    }
}

//! Exact and log-space combinatorics: binomial caches, factorial logs, and
//! logarithms of big integers.
//!
//! Exact paths hand out `BigInt` binomials from a Pascal-triangle cache;
//! float paths use compensated log-factorial tables so that alternating sums
//! assembled from them keep absolute errors near machine precision even for
//! `N` in the thousands.

use num::bigint::Sign;
use num::traits::ToPrimitive;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::sync::OnceLock;

/// Exact rational alias used throughout the crate.
pub type Rat = BigRational;

static ZERO_BIG: OnceLock<BigInt> = OnceLock::new();

fn zero_big() -> &'static BigInt {
    ZERO_BIG.get_or_init(BigInt::zero)
}

/// Pascal-triangle cache of exact binomial coefficients `C(n, k)` for
/// `n <= max_n`.
#[derive(Debug, Clone)]
pub struct Binomials {
    rows: Vec<Vec<BigInt>>,
}

impl Binomials {
    /// Build the cache for all `n` in `0..=max_n`.
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigInt::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigInt::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        Self { rows }
    }

    /// Largest `n` the cache covers.
    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// `C(n, k)`, zero when `k > n`. Panics if `n` exceeds the cache.
    pub fn c(&self, n: usize, k: usize) -> &BigInt {
        assert!(
            n < self.rows.len(),
            "binomial cache built to n = {} asked for n = {n}",
            self.rows.len() - 1
        );
        self.rows[n].get(k).unwrap_or_else(|| zero_big())
    }

    /// `C(n, k)` with signed arguments: zero when `n < 0`, `k < 0`, or
    /// `k > n`. Panics if `n` exceeds the cache.
    pub fn c_signed(&self, n: i64, k: i64) -> &BigInt {
        if n < 0 || k < 0 || k > n {
            zero_big()
        } else {
            self.c(n as usize, k as usize)
        }
    }

    /// `C(n, k)` as an exact rational.
    pub fn c_rat(&self, n: usize, k: usize) -> Rat {
        Rat::from_integer(self.c(n, k).clone())
    }
}

/// Single exact binomial by the multiplicative formula; `O(min(k, n-k))`
/// big-integer operations, no cache.
pub fn binom_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `base^exp` as an exact big integer.
pub fn big_pow(base: u64, exp: usize) -> BigInt {
    num::pow::pow(BigInt::from(base), exp)
}

/// Compensated table of `ln(n!)`.
///
/// Built with Kahan summation so that every entry carries only a few ulps of
/// error; a plain running sum would lose ~`n` ulps and poison alternating
/// sums downstream.
#[derive(Debug, Clone)]
pub struct LnFact {
    table: Vec<f64>,
}

impl LnFact {
    /// Build `ln(n!)` for all `n` in `0..=max_n`.
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        table.push(0.0);
        for i in 1..=max_n {
            let term = (i as f64).ln();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        Self { table }
    }

    /// Largest `n` the table covers.
    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    /// `ln(n!)`.
    pub fn ln_fact(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`; `-inf` when `k > n` (the binomial is zero).
    pub fn ln_binom(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `ln C(n, k)` with signed arguments; `-inf` outside the triangle.
    pub fn ln_binom_signed(&self, n: i64, k: i64) -> f64 {
        if n < 0 || k < 0 || k > n {
            f64::NEG_INFINITY
        } else {
            self.ln_binom(n as usize, k as usize)
        }
    }
}

/// Natural log of a positive big integer, accurate to a few ulps: the top 53
/// bits supply the mantissa, the remaining bit length the exponent.
///
/// Returns `-inf` for zero; panics on negative input (callers pass
/// magnitudes).
pub fn ln_big(x: &BigInt) -> f64 {
    match x.sign() {
        Sign::Minus => panic!("ln_big needs a nonnegative integer"),
        Sign::NoSign => f64::NEG_INFINITY,
        Sign::Plus => {
            let bits = x.bits();
            if bits <= 53 {
                x.to_f64().expect("small big integer fits f64").ln()
            } else {
                let shift = bits - 53;
                let top = (x >> shift).to_f64().expect("53-bit mantissa fits f64");
                top.ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }
}

/// Natural log of the absolute value of a rational; `-inf` at zero.
pub fn ln_rat_abs(r: &Rat) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_big(&r.numer().abs()) - ln_big(r.denom())
}

/// The pair of combinatorial caches nearly every computation threads
/// through: exact binomials and compensated log-factorials, both sized for
/// the same maximum dimension.
pub struct Workspace {
    pub bin: Binomials,
    pub lf: LnFact,
}

impl Workspace {
    pub fn new(max_n: usize) -> Self {
        Self {
            bin: Binomials::new(max_n),
            lf: LnFact::new(max_n),
        }
    }

    pub fn max_n(&self) -> usize {
        self.bin.max_n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_cache_matches_known_values() {
        let bin = Binomials::new(64);
        assert_eq!(bin.c(10, 5), &BigInt::from(252));
        assert_eq!(bin.c(0, 0), &BigInt::one());
        assert_eq!(bin.c(5, 9), &BigInt::zero());
        assert_eq!(bin.c_signed(-1, 0), &BigInt::zero());
        assert_eq!(bin.c_signed(4, -1), &BigInt::zero());

        let row_sum: BigInt = (0..=64).map(|k| bin.c(64, k).clone()).sum();
        assert_eq!(row_sum, big_pow(2, 64));
    }

    #[test]
    fn multiplicative_binomial_matches_cache() {
        let bin = Binomials::new(52);
        for &(n, k) in &[(52usize, 26usize), (40, 7), (31, 0), (31, 31)] {
            assert_eq!(&binom_big(n, k), bin.c(n, k));
        }
        assert_eq!(binom_big(5, 9), BigInt::zero());
    }

    #[test]
    fn big_pow_matches_small_cases() {
        assert_eq!(big_pow(3, 5), BigInt::from(243));
        assert_eq!(big_pow(7, 0), BigInt::one());
    }

    #[test]
    fn ln_binom_tracks_exact_logs_at_large_n() {
        let lf = LnFact::new(4096);
        for &(n, k) in &[(4096usize, 2048usize), (4096, 100), (2500, 1250), (512, 256)] {
            let approx = lf.ln_binom(n, k);
            let exact = ln_big(&binom_big(n, k));
            assert!(
                (approx - exact).abs() <= 5e-11,
                "ln C({n},{k}): {approx} vs {exact}"
            );
        }
        assert_eq!(lf.ln_binom(10, 11), f64::NEG_INFINITY);
        assert_eq!(lf.ln_binom_signed(-3, 0), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_big_handles_powers_of_two_and_zero() {
        let x = big_pow(2, 200);
        let expected = 200.0 * std::f64::consts::LN_2;
        assert!((ln_big(&x) - expected).abs() <= 1e-12 * expected);
        assert_eq!(ln_big(&BigInt::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_rat_abs_splits_numerator_and_denominator() {
        let r = Rat::new(BigInt::from(-3), BigInt::from(8));
        let expected = (3.0_f64 / 8.0).ln();
        assert!((ln_rat_abs(&r) - expected).abs() <= 1e-14);
        assert_eq!(ln_rat_abs(&Rat::zero()), f64::NEG_INFINITY);
    }
}

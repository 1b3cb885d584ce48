//! Certificate drivers: each quantitative statement the library implements
//! is swept over a parameter grid, the sharpest constant the data supports
//! is measured, and the result is judged against configured thresholds.
//!
//! Certificates never compare against invented "true" constants: pass
//! criteria are positivity, finiteness, and dimension-stability (an
//! N-plateau of the measured values). Every run is deterministic given its
//! seed, and every failure carries a reproduction command.

pub mod bigkchoice;
pub mod blbound;
pub mod decay;
pub mod dominant;
pub mod norms;
pub mod ns;
pub mod oracle;
pub mod reparam;
pub mod square_sum;
pub mod transfer;
pub mod weak11;

use crate::combin::Rat;
use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::scalar::rat;
use crate::GroupParams;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

/// One CSV artifact of a certificate run.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// File stem (`<name>.csv`).
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "csv row arity");
        self.rows.push(row);
    }

    /// Render to bytes; deterministic for identical content.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one certificate driver.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    /// Suite id (also the output subdirectory name).
    pub suite: String,
    /// Human-readable grid description.
    pub grid: String,
    pub seed: u64,
    /// Plateau threshold the verdict used.
    pub threshold: f64,
    /// Named headline constants measured by the sweep.
    pub measured: Vec<(String, f64)>,
    /// Extremal witnesses, each with a command that reproduces it.
    pub witnesses: Vec<String>,
    /// Failure descriptions (empty iff verdict is Pass).
    pub failures: Vec<String>,
    pub verdict: Verdict,
    /// Wall time; reported in the manifest, never in CSVs.
    pub runtime_secs: f64,
    pub tables: Vec<CsvTable>,
}

impl CertificateReport {
    fn new(suite: &str, grid: String, seed: u64, threshold: f64) -> Self {
        Self {
            suite: suite.to_string(),
            grid,
            seed,
            threshold,
            measured: Vec::new(),
            witnesses: Vec::new(),
            failures: Vec::new(),
            verdict: Verdict::Pass,
            runtime_secs: 0.0,
            tables: Vec::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
        self.verdict = Verdict::Fail;
    }

    /// One-line verdict for standard output.
    pub fn summary_line(&self) -> String {
        let status = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        let headline = self
            .measured
            .iter()
            .map(|(k, v)| format!("{k}={v:.6}"))
            .collect::<Vec<_>>()
            .join(" ");
        format!("{}: {} [{}] {}", self.suite, status, self.grid, headline)
    }
}

/// Per-suite plateau thresholds with overridable defaults.
#[derive(Clone, Debug, Default)]
pub struct Thresholds {
    overrides: BTreeMap<String, f64>,
}

impl Thresholds {
    pub fn set(&mut self, suite: &str, value: f64) {
        self.overrides.insert(suite.to_string(), value);
    }

    /// Configured threshold: explicit override, else 2 for the norm search,
    /// else 3.
    pub fn get(&self, suite: &str) -> f64 {
        if let Some(v) = self.overrides.get(suite) {
            return *v;
        }
        match suite {
            "norms" => 2.0,
            _ => 3.0,
        }
    }
}

/// Shared configuration every certificate driver receives.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub ms: Vec<u32>,
    pub ns: Vec<usize>,
    pub seed: u64,
    /// Largest group cardinality dense-oracle work may enumerate.
    pub oracle_cap: u64,
    pub thresholds: Thresholds,
    /// Difference orders for the square-function suite.
    pub t_orders: Vec<usize>,
    /// Complex order α + iβ for the pointwise-comparison suite.
    pub alpha: Rat,
    pub beta: Rat,
    /// Difference order for the pointwise-comparison suite.
    pub ns_t: usize,
    /// Exponents for the operator-norm search.
    pub p_exponents: Vec<f64>,
    /// Random-input batch size.
    pub batch: usize,
}

impl SuiteConfig {
    pub fn new(ms: Vec<u32>, ns: Vec<usize>) -> Self {
        Self {
            ms,
            ns,
            seed: 1729,
            oracle_cap: 100_000,
            thresholds: Thresholds::default(),
            t_orders: vec![1, 2],
            alpha: rat(1, 1),
            beta: rat(1, 1),
            ns_t: 1,
            p_exponents: vec![1.5, 2.0],
            batch: 20,
        }
    }

    pub fn grid_desc(&self) -> String {
        format!(
            "m ∈ {{{}}}, N ∈ {{{}}}",
            join_nums(&self.ms),
            join_nums(&self.ns)
        )
    }
}

pub(crate) fn join_nums<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Suite ids `verify` accepts, in the order `verify all` runs them.
pub fn suite_ids() -> &'static [&'static str] {
    &[
        "oracle",
        "dominant",
        "decay",
        "square-sum",
        "reparam",
        "bigkchoice",
        "blbound",
        "transfer",
        "ns",
        "weak11",
        "norms",
    ]
}

/// Run one certificate suite by id.
pub fn run_suite(id: &str, cfg: &SuiteConfig) -> Result<CertificateReport> {
    let start = Instant::now();
    let mut report = match id {
        "oracle" => oracle::run(cfg),
        "dominant" => dominant::run(cfg),
        "decay" => decay::run(cfg),
        "square-sum" => square_sum::run(cfg),
        "reparam" => reparam::run(cfg),
        "bigkchoice" => bigkchoice::run(cfg),
        "blbound" => blbound::run(cfg),
        "transfer" => transfer::run(cfg),
        "ns" => ns::run(cfg),
        "weak11" => weak11::run(cfg),
        "norms" => norms::run(cfg),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite '{other}'; known: {}",
                suite_ids().join(", ")
            )))
        }
    }?;
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// max / median of a sequence of measurements — the dimension-stability
/// statistic every plateau check uses. Median is the mean of the two
/// central order statistics. An all-(near-)zero sequence is flat (returns
/// 1); a zero median under a positive max has no meaningful ratio (`None`,
/// which callers treat as failure).
pub fn max_over_median(vals: &[f64]) -> Option<f64> {
    if vals.is_empty() {
        return None;
    }
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    if max.abs() <= 1e-12 {
        return Some(1.0);
    }
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite measurements"));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    if median <= 0.0 {
        None
    } else {
        Some(max / median)
    }
}

/// "Does not tend to zero" check: the last value is at least 90% of the
/// smallest earlier value. Singleton sequences pass trivially.
pub fn holds_above_running_min(vals: &[f64]) -> bool {
    if vals.len() < 2 {
        return true;
    }
    let earlier_min = vals[..vals.len() - 1]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    vals[vals.len() - 1] >= 0.9 * earlier_min
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// One step of the splitmix64 sequence.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-job seed: fold the job coordinates into the base seed
/// so that parallel execution order cannot influence any random stream.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        out = splitmix64(&mut state);
    }
    out
}

/// Seeded generator for one job.
pub fn job_rng(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// Random nonnegative radial profile: i.i.d. uniform values per radius,
/// normalized to unit L¹ mass.
pub fn random_radial_nonneg(
    rng: &mut ChaCha8Rng,
    params: GroupParams,
    bin: &crate::combin::Binomials,
) -> RadialProfile<f64> {
    let vals: Vec<f64> = (0..=params.n()).map(|_| rng.gen::<f64>()).collect();
    let mut prof = RadialProfile::from_vals(params, vals);
    let mass = prof.mass(bin);
    for v in &mut prof.vals {
        *v /= mass;
    }
    prof.nonneg = true;
    prof
}

/// Shortest round-trip decimal for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Exact rationals serialize as `num/den`.
pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_statistic_basics() {
        assert_eq!(max_over_median(&[2.0, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(max_over_median(&[1.0, 2.0, 6.0]).unwrap(), 3.0);
        // Even length: median is the mean of the middle two.
        assert_eq!(max_over_median(&[1.0, 2.0, 4.0, 6.0]).unwrap(), 2.0);
        // All-zero sequences are flat, not divide-by-zero failures.
        assert_eq!(max_over_median(&[0.0, 0.0]).unwrap(), 1.0);
        // Zero median under positive max is a real failure.
        assert!(max_over_median(&[0.0, 0.0, 0.0, 7.0]).is_none());
        assert!(max_over_median(&[]).is_none());
        assert!(max_over_median(&[f64::INFINITY]).is_none());
    }

    #[test]
    fn running_min_check() {
        assert!(holds_above_running_min(&[1.0]));
        assert!(holds_above_running_min(&[1.3, 1.4, 1.25]));
        assert!(!holds_above_running_min(&[1.3, 1.4, 0.5]));
        // Exactly at the 0.9 boundary passes.
        assert!(holds_above_running_min(&[1.0, 0.9]));
    }

    #[test]
    fn seeds_are_order_sensitive_and_stable() {
        let a = derive_seed(1729, &[2, 8]);
        let b = derive_seed(1729, &[8, 2]);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(1729, &[2, 8]));
        let mut s = 0u64;
        let first = splitmix64(&mut s);
        assert_ne!(first, splitmix64(&mut s));
    }

    #[test]
    fn thresholds_defaults_and_overrides() {
        let mut th = Thresholds::default();
        assert_eq!(th.get("decay"), 3.0);
        assert_eq!(th.get("norms"), 2.0);
        th.set("square-sum", 5.0);
        assert_eq!(th.get("square-sum"), 5.0);
    }

    #[test]
    fn slope_of_decaying_line_is_negative() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 5.0 - 0.7 * i as f64)).collect();
        let s = ls_slope(&pts).unwrap();
        assert!((s + 0.7).abs() < 1e-12);
    }

    #[test]
    fn csv_rendering_is_stable() {
        let mut t = CsvTable::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), "0.5".into()]);
        assert_eq!(t.to_csv_string(), "a,b\n1,0.5\n");
    }
}

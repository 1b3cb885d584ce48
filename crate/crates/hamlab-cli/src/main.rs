//! `hamlab` — numerical harmonic analysis on `Z_{m+1}^N` with the Hamming
//! metric, from the command line.
//!
//! Three subcommands:
//! - `verify <suite|all>` runs numerical certificates over an `(m, N)` grid
//!   and writes CSV tables, plots, and a `manifest.json`;
//! - `eval <op>` applies one registry operator to an input profile;
//! - `table <kind>` emits reference tables (Krawtchouk values, collision
//!   weights, summand magnitudes).
//!
//! Exit codes: 0 = success, 1 = at least one certificate failed,
//! 2 = usage or configuration error.

mod eval;
mod grid;
mod plots;
mod run;
mod table;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hamlab::bounds::{fmt_rat, SuiteConfig};
use hamlab::{GroupParams, Rat};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hamlab",
    version,
    about = "Numerical harmonic analysis on Z_{m+1}^N with the Hamming metric: \
             certificate suites, operator evaluation, and reference tables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a certificate suite (or `all`) over the (m, N) grid and write
    /// CSV tables, plots, and a manifest under --out.
    Verify {
        /// Suite id (see `--help` of a failed run for the list), or `all`.
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Apply a registry operator to an input profile and write the
    /// resulting radial profile.
    Eval {
        /// Operator id: M, ML, MD, MSL, MSD, Sstar:a:b, Tstar:a:b, Rt:t, RtD:t.
        op: String,
        /// Input profile: `delta`, `uniform` (the constant function 1),
        /// `ball:R` (normalized ball indicator), or a CSV file of
        /// `r,value` rows.
        #[arg(long, default_value = "delta")]
        input: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit a reference table: krawtchouk, bweights, or summand.
    Table {
        /// Table kind: krawtchouk | bweights | summand.
        kind: String,
        /// Frequency weight r (summand tables).
        #[arg(long)]
        r: Option<usize>,
        /// Averaging radius k (bweights and summand tables).
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Numeric backend for eval/table outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    /// Arbitrary-precision rationals; every printed value is exact.
    Exact,
    /// f64 throughout, via cancellation-free transition matrices.
    Float,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Float => "float",
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Alphabet parameters m (alphabet size minus one): comma list or
    /// range, e.g. `2,3` or `2..5`.
    #[arg(long, default_value = "2,3", value_name = "LIST")]
    m: String,
    /// Dimensions N: comma list or range. `a..b:s` steps arithmetically,
    /// `a..b:x2` geometrically; a bare `a..b` doubles when b >= 4a and
    /// otherwise steps by 1.
    #[arg(long, default_value = "8..64", value_name = "LIST")]
    n: String,
    /// Arithmetic backend for eval/table outputs.
    #[arg(long, value_enum, default_value_t = Precision::Exact)]
    precision: Precision,
    /// Base seed for every randomized sweep.
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    /// Largest group cardinality brute-force comparisons may enumerate.
    #[arg(long = "oracle-cap", default_value_t = 100_000)]
    oracle_cap: u64,
    /// Output directory for CSVs, plots, and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Per-suite pass-threshold override, `SUITE=VALUE`; repeatable.
    #[arg(long, value_name = "SUITE=VALUE")]
    threshold: Vec<String>,
    /// Difference orders for the square-function suites; the first one is
    /// also the order used by the pointwise-domination suite.
    #[arg(long, default_value = "1,2", value_name = "LIST")]
    t: String,
    /// Exponents for the operator-norm search.
    #[arg(long = "p-exponent", default_value = "1.5,2", value_name = "LIST")]
    p_exponent: String,
    /// Real part of the complex Cesàro order used by order-sensitive
    /// suites (integer, fraction a/b, or decimal).
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Imaginary part of the complex Cesàro order.
    #[arg(long, default_value = "1")]
    beta: String,
    /// Print the fully resolved plan and exit without computing or
    /// writing anything.
    #[arg(long)]
    dry_run: bool,
    /// Also render self-contained SVG charts next to the gnuplot scripts.
    #[arg(long)]
    svg: bool,
}

/// Fully parsed and validated configuration, shared by all subcommands.
pub struct Resolved {
    pub ms: Vec<u32>,
    pub ns: Vec<usize>,
    pub precision: Precision,
    pub seed: u64,
    pub oracle_cap: u64,
    pub out: PathBuf,
    pub thresholds: Vec<(String, f64)>,
    pub t_orders: Vec<usize>,
    pub p_exponents: Vec<f64>,
    pub alpha: Rat,
    pub beta: Rat,
    pub dry_run: bool,
    pub svg: bool,
}

impl Resolved {
    fn from_common(c: &CommonArgs) -> Result<Self> {
        let mut ms = grid::parse_ms(&c.m)?;
        ms.sort_unstable();
        ms.dedup();
        let mut ns = grid::parse_positive_usizes(&c.n)?;
        ns.sort_unstable();
        ns.dedup();
        let t_orders = grid::parse_positive_usizes(&c.t)?;
        ensure!(
            t_orders.iter().all(|&t| t <= 8),
            "difference orders above 8 are not supported"
        );
        Ok(Self {
            ms,
            ns,
            precision: c.precision,
            seed: c.seed,
            oracle_cap: c.oracle_cap,
            out: c.out.clone(),
            thresholds: grid::parse_thresholds(&c.threshold)?,
            t_orders,
            p_exponents: grid::parse_exponents(&c.p_exponent)?,
            alpha: grid::parse_rational(&c.alpha)?,
            beta: grid::parse_rational(&c.beta)?,
            dry_run: c.dry_run,
            svg: c.svg,
        })
    }

    /// The library-side configuration this resolved CLI state denotes.
    pub fn suite_config(&self) -> SuiteConfig {
        let mut cfg = SuiteConfig::new(self.ms.clone(), self.ns.clone());
        cfg.seed = self.seed;
        cfg.oracle_cap = self.oracle_cap;
        for (suite, v) in &self.thresholds {
            cfg.thresholds.set(suite, *v);
        }
        cfg.t_orders = self.t_orders.clone();
        cfg.ns_t = self.t_orders[0];
        cfg.p_exponents = self.p_exponents.clone();
        cfg.alpha = self.alpha.clone();
        cfg.beta = self.beta.clone();
        cfg
    }

    /// The single group used by eval/table; grids larger than one entry
    /// fall back to their first value with a notice.
    pub fn single_params(&self) -> Result<GroupParams> {
        let m = self.ms[0];
        let n = self.ns[0];
        if self.ms.len() > 1 || self.ns.len() > 1 {
            eprintln!(
                "note: this command uses one group; taking m = {m}, N = {n} \
                 and ignoring the rest of the grid"
            );
        }
        Ok(GroupParams::new(m, n)?)
    }

    pub fn config_echo(&self) -> run::ConfigEcho {
        run::ConfigEcho {
            m: self.ms.clone(),
            n: self.ns.clone(),
            precision: self.precision.name().to_string(),
            seed: self.seed,
            oracle_cap: self.oracle_cap,
            thresholds: self.thresholds.clone(),
            t: self.t_orders.clone(),
            p_exponents: self.p_exponents.clone(),
            alpha: fmt_rat(&self.alpha),
            beta: fmt_rat(&self.beta),
            out: self.out.display().to_string(),
            svg: self.svg,
        }
    }

    /// Human-readable plan, used by `--dry-run`.
    pub fn describe_plan(&self, command: &str) -> String {
        let join_us = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "plan: {command}");
        let _ = writeln!(
            s,
            "  m: {}",
            self.ms
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        let _ = writeln!(s, "  N: {}", join_us(&self.ns));
        let _ = writeln!(s, "  precision: {}", self.precision.name());
        let _ = writeln!(s, "  seed: {}", self.seed);
        let _ = writeln!(s, "  oracle cap: {}", self.oracle_cap);
        if self.thresholds.is_empty() {
            let _ = writeln!(s, "  thresholds: defaults");
        } else {
            let list: Vec<String> = self
                .thresholds
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(s, "  thresholds: {} (defaults elsewhere)", list.join(", "));
        }
        let _ = writeln!(s, "  t orders: {}", join_us(&self.t_orders));
        let _ = writeln!(
            s,
            "  p exponents: {}",
            self.p_exponents
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        let _ = writeln!(s, "  cesaro order: {} + {}i", self.alpha, self.beta);
        let _ = write!(s, "  out: {}", self.out.display());
        s
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Verify { suite, common } => {
            run::cmd_verify(&suite, &Resolved::from_common(&common)?)
        }
        Cmd::Eval { op, input, common } => {
            eval::cmd_eval(&op, &input, &Resolved::from_common(&common)?)
        }
        Cmd::Table { kind, r, k, common } => {
            table::cmd_table(&kind, r, k, &Resolved::from_common(&common)?)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

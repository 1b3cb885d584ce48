//! The `verify` subcommand and the shared output machinery: the output
//! directory lock, CSV/plot emission, and the run manifest.

use crate::plots::{extract_series, render_dat, render_plt, render_svg, suite_plot_spec};
use crate::Resolved;
use anyhow::{bail, Context, Result};
use hamlab::bounds::{run_suite, suite_ids, CertificateReport, Verdict};
use serde::Serialize;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exclusive claim on an output directory, held for the life of a writing
/// command. A second invocation pointed at the same directory fails fast
/// instead of interleaving files.
pub struct OutDirLock {
    lock_path: PathBuf,
}

impl OutDirLock {
    pub fn acquire(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        let lock_path = root.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock_path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { lock_path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "output directory {} is locked by another invocation; \
                 remove {} if that run is no longer alive",
                root.display(),
                lock_path.display()
            ),
            Err(e) => {
                Err(e).with_context(|| format!("creating lock file {}", lock_path.display()))
            }
        }
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock_path);
    }
}

/// Echo of the fully resolved configuration, stored in the manifest.
#[derive(Serialize)]
pub struct ConfigEcho {
    pub m: Vec<u32>,
    pub n: Vec<usize>,
    pub precision: String,
    pub seed: u64,
    pub oracle_cap: u64,
    pub thresholds: Vec<(String, f64)>,
    pub t: Vec<usize>,
    pub p_exponents: Vec<f64>,
    pub alpha: String,
    pub beta: String,
    pub out: String,
    pub svg: bool,
}

#[derive(Serialize)]
struct MeasuredEntry {
    name: String,
    value: serde_json::Value,
}

/// One suite's manifest record; built from its certificate report.
#[derive(Serialize)]
pub struct SuiteEntry {
    suite: String,
    grid: String,
    seed: u64,
    threshold: f64,
    verdict: &'static str,
    runtime_secs: f64,
    measured: Vec<MeasuredEntry>,
    witnesses: Vec<String>,
    failures: Vec<String>,
    tables: Vec<String>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: &'static str,
    wall_secs: f64,
    config: ConfigEcho,
    suites: Vec<SuiteEntry>,
    outputs: Vec<String>,
}

/// JSON value for a measured statistic; infinities survive as strings.
fn json_f64(v: f64) -> serde_json::Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(hamlab::bounds::fmt_f64(v)),
    }
}

fn suite_entry(report: &CertificateReport, tables: Vec<String>) -> SuiteEntry {
    SuiteEntry {
        suite: report.suite.clone(),
        grid: report.grid.clone(),
        seed: report.seed,
        threshold: report.threshold,
        verdict: match report.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        },
        runtime_secs: report.runtime_secs,
        measured: report
            .measured
            .iter()
            .map(|(name, v)| MeasuredEntry {
                name: name.clone(),
                value: json_f64(*v),
            })
            .collect(),
        witnesses: report.witnesses.clone(),
        failures: report.failures.clone(),
        tables,
    }
}

/// Write `manifest.json` describing the finished command.
pub fn write_manifest(
    rc: &Resolved,
    command: &str,
    suites: Vec<SuiteEntry>,
    outputs: Vec<String>,
    wall_secs: f64,
) -> Result<()> {
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        wall_secs,
        config: rc.config_echo(),
        suites,
        outputs,
    };
    let path = rc.out.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    fs::write(&path, body + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write a report's CSV tables and plots under `<out>/<suite>/`, returning
/// the manifest entry and the relative paths written.
pub fn emit_report(rc: &Resolved, report: &CertificateReport) -> Result<(SuiteEntry, Vec<String>)> {
    let dir = rc.out.join(&report.suite);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for table in &report.tables {
        let rel = format!("{}/{}.csv", report.suite, table.name);
        fs::write(dir.join(format!("{}.csv", table.name)), table.to_csv_string())
            .with_context(|| format!("writing {rel}"))?;
        written.push(rel);
    }
    if let Some(spec) = suite_plot_spec(&report.suite) {
        if let Some(table) = report.tables.iter().find(|t| t.name == spec.table) {
            let series = extract_series(table, &spec);
            if !series.is_empty() {
                let title = format!("{}: {} vs {}", report.suite, spec.y, spec.x);
                fs::write(dir.join("plot.dat"), render_dat(&series))?;
                written.push(format!("{}/plot.dat", report.suite));
                fs::write(
                    dir.join("plot.plt"),
                    render_plt(&title, spec.x, spec.y, "plot.dat", "render.svg", &series),
                )?;
                written.push(format!("{}/plot.plt", report.suite));
                if rc.svg {
                    fs::write(
                        dir.join("plot.svg"),
                        render_svg(&title, spec.x, spec.y, &series),
                    )?;
                    written.push(format!("{}/plot.svg", report.suite));
                }
            }
        }
    }
    let tables = report
        .tables
        .iter()
        .map(|t| format!("{}/{}.csv", report.suite, t.name))
        .collect();
    Ok((suite_entry(report, tables), written))
}

fn resolve_suites(arg: &str) -> Result<Vec<&'static str>> {
    if arg == "all" {
        return Ok(suite_ids().to_vec());
    }
    match suite_ids().iter().find(|s| **s == arg) {
        Some(s) => Ok(vec![*s]),
        None => bail!(
            "unknown suite {arg:?}; known suites: {}, or `all`",
            suite_ids().join(", ")
        ),
    }
}

/// Run one suite (or all of them) and write every artifact. Exit code 0
/// when every certificate passes, 1 when any fails.
pub fn cmd_verify(suite_arg: &str, rc: &Resolved) -> Result<i32> {
    let suites = resolve_suites(suite_arg)?;
    if rc.dry_run {
        println!("{}", rc.describe_plan(&format!("verify {suite_arg}")));
        println!("  suites: {}", suites.join(", "));
        println!("(dry run: nothing computed, nothing written)");
        return Ok(0);
    }
    let start = Instant::now();
    let _lock = OutDirLock::acquire(&rc.out)?;
    let cfg = rc.suite_config();
    let mut entries = Vec::new();
    let mut outputs = Vec::new();
    let mut failed = 0usize;
    for id in &suites {
        let report = run_suite(id, &cfg).with_context(|| format!("running suite {id}"))?;
        println!("{}", report.summary_line());
        let (entry, written) = emit_report(rc, &report)?;
        entries.push(entry);
        outputs.extend(written);
        if report.verdict == Verdict::Fail {
            failed += 1;
        }
    }
    let wall = start.elapsed().as_secs_f64();
    write_manifest(rc, &format!("verify {suite_arg}"), entries, outputs, wall)?;
    println!(
        "{} suite(s) run, {failed} failed, wall {wall:.1}s; artifacts in {}",
        suites.len(),
        rc.out.display()
    );
    Ok(if failed > 0 { 1 } else { 0 })
}

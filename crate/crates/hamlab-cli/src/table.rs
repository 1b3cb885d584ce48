//! The `table` subcommand: exact (or float) reference tables for the
//! Krawtchouk polynomials, the sphere-collision weights, and the summand
//! magnitudes of the Krawtchouk alternating sum.

use crate::run::{write_manifest, OutDirLock};
use crate::{Precision, Resolved};
use anyhow::{anyhow, bail, Result};
use hamlab::bounds::{fmt_f64, fmt_rat};
use hamlab::combin::Workspace;
use hamlab::krawtchouk::{summand_analysis, KrawtchoukTable, KrawtchoukTableF64};
use hamlab::radial::b_weights;
use std::fs;
use std::time::Instant;

fn krawtchouk_csv(rc: &Resolved) -> Result<(String, Vec<String>)> {
    let params = rc.single_params()?;
    let n = params.n();
    let mut csv = String::from("r,k,value\n");
    let mut notes = Vec::new();
    match rc.precision {
        Precision::Exact => {
            if n > 256 {
                bail!(
                    "exact Krawtchouk tables are capped at N = 256 (got N = {n}); \
                     rerun with --precision float"
                );
            }
            let ws = Workspace::new(n);
            let table = KrawtchoukTable::new(&ws.bin, params);
            for r in 0..=n {
                for k in 0..=n {
                    csv.push_str(&format!("{r},{k},{}\n", fmt_rat(table.get(r, k))));
                }
            }
            if n <= 8 {
                for r in 0..=n {
                    let row: Vec<String> =
                        (0..=n).map(|k| format!("{}", table.get(r, k))).collect();
                    notes.push(format!("  r={r}: {}", row.join("  ")));
                }
            }
        }
        Precision::Float => {
            let ws = Workspace::new(n);
            let table = KrawtchoukTableF64::new(&ws.lf, params);
            for r in 0..=n {
                for k in 0..=n {
                    csv.push_str(&format!("{r},{k},{}\n", fmt_f64(table.get(r, k))));
                }
            }
            notes.push(format!(
                "  worst per-entry error estimate: {}",
                fmt_f64(table.max_abs_err)
            ));
        }
    }
    Ok((csv, notes))
}

fn bweights_csv(rc: &Resolved, k: Option<usize>) -> Result<(String, Vec<String>)> {
    let k = k.ok_or_else(|| anyhow!("table bweights needs --k (the averaging radius)"))?;
    let m = rc.ms[0];
    let weights = b_weights(m, k);
    let mut csv = String::from("d,value\n");
    for (d, w) in weights.iter().enumerate() {
        csv.push_str(&format!("{d},{}\n", fmt_rat(w)));
    }
    let pretty: Vec<String> = weights.iter().map(|w| format!("{w}")).collect();
    let notes = vec![format!(
        "  collision weights for m={m}, k={k}: {}",
        pretty.join(", ")
    )];
    Ok((csv, notes))
}

fn summand_csv(rc: &Resolved, r: Option<usize>, k: Option<usize>) -> Result<(String, Vec<String>)> {
    let r = r.ok_or_else(|| anyhow!("table summand needs --r (the frequency weight)"))?;
    let k = k.ok_or_else(|| anyhow!("table summand needs --k (the averaging radius)"))?;
    let params = rc.single_params()?;
    let ws = Workspace::new(params.n());
    let sa = summand_analysis(&ws.bin, params, r, k)?;
    let mut csv = String::from("j,a_j,ratio_to_next\n");
    for j in sa.ell..=r {
        let ratio = if j < r {
            fmt_rat(&sa.ratio(j))
        } else {
            String::new()
        };
        csv.push_str(&format!("{j},{},{ratio}\n", fmt_rat(&sa.magnitude(j))));
    }
    let pretty: Vec<String> = (sa.ell..=r)
        .map(|j| format!("a_{j} = {}", sa.magnitude(j)))
        .collect();
    let mut notes = vec![
        format!("  lowest index ell = {}", sa.ell),
        format!("  peak at j = {}", sa.peak),
        format!("  {}", pretty.join(", ")),
    ];
    if let Some(x) = sa.j_crossover {
        notes.push(format!("  ratio crossover at j = {}", fmt_f64(x)));
    }
    Ok((csv, notes))
}

pub fn cmd_table(
    kind: &str,
    r: Option<usize>,
    k: Option<usize>,
    rc: &Resolved,
) -> Result<i32> {
    if !matches!(kind, "krawtchouk" | "bweights" | "summand") {
        bail!("unknown table kind {kind:?}; expected krawtchouk, bweights, or summand");
    }
    if rc.dry_run {
        println!("{}", rc.describe_plan(&format!("table {kind}")));
        if let Some(r) = r {
            println!("  r: {r}");
        }
        if let Some(k) = k {
            println!("  k: {k}");
        }
        println!("(dry run: nothing computed, nothing written)");
        return Ok(0);
    }
    let start = Instant::now();
    let (csv, notes) = match kind {
        "krawtchouk" => krawtchouk_csv(rc)?,
        "bweights" => bweights_csv(rc, k)?,
        _ => summand_csv(rc, r, k)?,
    };
    let _lock = OutDirLock::acquire(&rc.out)?;
    let dir = rc.out.join("table");
    fs::create_dir_all(&dir)?;
    let rel = format!("table/{kind}.csv");
    fs::write(dir.join(format!("{kind}.csv")), csv)?;
    for note in &notes {
        println!("{note}");
    }
    let wall = start.elapsed().as_secs_f64();
    write_manifest(rc, &format!("table {kind}"), Vec::new(), vec![rel.clone()], wall)?;
    println!("wrote {}", rc.out.join(rel).display());
    Ok(0)
}

//! The `eval` subcommand: apply one registry operator to an input profile
//! and write the resulting radial profile as CSV (plus a plot).

use crate::grid::parse_rational;
use crate::plots::{render_dat, render_plt, render_svg, Series};
use crate::run::{write_manifest, OutDirLock};
use crate::{Precision, Resolved};
use anyhow::{anyhow, bail, ensure, Context, Result};
use hamlab::bounds::{fmt_f64, fmt_rat};
use hamlab::combin::Workspace;
use hamlab::ops::{
    apply_op_plain, apply_op_sq, embed_table_c64, embed_table_crat, ConvTable, OpSpec, PreparedOp,
    TransitionTensor, ValueKind,
};
use hamlab::radial::{ball_profile, delta_profile, kraw_matrix, RadialProfile};
use hamlab::scalar::RealScalar;
use hamlab::{GroupParams, Rat, C64, CRat};
use num::One;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Where the input profile comes from.
enum EvalInput {
    /// Point mass at the origin.
    Delta,
    /// The constant function 1 on the whole group.
    Uniform,
    /// Normalized indicator of the radius-`rho` ball.
    Ball(usize),
    /// CSV file of `r,value` rows; omitted radii are zero.
    File(PathBuf),
}

impl EvalInput {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(Self::Delta),
            "uniform" => Ok(Self::Uniform),
            _ => {
                if let Some(rho) = s.strip_prefix("ball:") {
                    let rho: usize = rho
                        .parse()
                        .map_err(|_| anyhow!("bad ball radius in input {s:?}"))?;
                    Ok(Self::Ball(rho))
                } else {
                    Ok(Self::File(PathBuf::from(s)))
                }
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Delta => "delta".into(),
            Self::Uniform => "uniform".into(),
            Self::Ball(rho) => format!("ball:{rho}"),
            Self::File(p) => p.display().to_string(),
        }
    }
}

/// Exact values of a `r,value` profile file, reported with 1-based row
/// numbers on any malformed line.
fn parse_profile_file(path: &Path, n: usize) -> Result<Vec<Rat>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading input profile {}", path.display()))?;
    let mut vals = vec![Rat::from_integer(0.into()); n + 1];
    let mut seen = vec![false; n + 1];
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if row == 1 && line == "r,value" {
            continue;
        }
        let at = || format!("input profile {}, row {row}", path.display());
        let Some((rs, vs)) = line.split_once(',') else {
            bail!("{}: expected `r,value`, got {line:?}", at());
        };
        let r: usize = rs
            .trim()
            .parse()
            .map_err(|_| anyhow!("{}: bad radius {rs:?}", at()))?;
        ensure!(r <= n, "{}: radius {r} exceeds N = {n}", at());
        ensure!(!seen[r], "{}: duplicate radius {r}", at());
        let v = parse_rational(vs).map_err(|e| anyhow!("{}: bad value {vs:?} ({e})", at()))?;
        seen[r] = true;
        vals[r] = v;
    }
    Ok(vals)
}

fn profile_exact(
    params: GroupParams,
    input: &EvalInput,
    ws: &Workspace,
) -> Result<RadialProfile<Rat>> {
    match input {
        EvalInput::Delta => Ok(delta_profile(params)),
        EvalInput::Uniform => Ok(RadialProfile::from_vals(
            params,
            vec![Rat::one(); params.n() + 1],
        )),
        EvalInput::Ball(rho) => Ok(ball_profile(params, &ws.bin, *rho)?),
        EvalInput::File(p) => Ok(RadialProfile::from_vals(
            params,
            parse_profile_file(p, params.n())?,
        )),
    }
}

fn profile_float(
    params: GroupParams,
    input: &EvalInput,
    ws: &Workspace,
) -> Result<RadialProfile<f64>> {
    match input {
        EvalInput::Delta => Ok(delta_profile(params)),
        EvalInput::Uniform => Ok(RadialProfile::from_vals(params, vec![1.0; params.n() + 1])),
        EvalInput::Ball(rho) => Ok(ball_profile(params, &ws.bin, *rho)?),
        EvalInput::File(p) => {
            let vals = parse_profile_file(p, params.n())?;
            Ok(RadialProfile::from_vals(
                params,
                vals.iter().map(RealScalar::to_f64).collect(),
            ))
        }
    }
}

/// One output radius: CSV cell, human form, plottable value, achiever.
struct EvalRow {
    r: usize,
    cell: String,
    display: String,
    plot: f64,
    achiever: Option<usize>,
}

fn rows_exact(values: &[Rat], achievers: &[Option<usize>]) -> Vec<EvalRow> {
    values
        .iter()
        .zip(achievers)
        .enumerate()
        .map(|(r, (v, a))| EvalRow {
            r,
            cell: fmt_rat(v),
            display: format!("{v}"),
            plot: RealScalar::to_f64(v),
            achiever: *a,
        })
        .collect()
}

fn rows_float(values: &[f64], achievers: &[Option<usize>]) -> Vec<EvalRow> {
    values
        .iter()
        .zip(achievers)
        .enumerate()
        .map(|(r, (v, a))| EvalRow {
            r,
            cell: fmt_f64(*v),
            display: fmt_f64(*v),
            plot: *v,
            achiever: *a,
        })
        .collect()
}

fn eval_exact(
    spec: &OpSpec,
    params: GroupParams,
    input: &EvalInput,
    ws: &Workspace,
) -> Result<Vec<EvalRow>> {
    let profile = profile_exact(params, input, ws)?;
    let kmat = kraw_matrix::<Rat>(params, &ws.bin, &ws.lf);
    let table = ConvTable::from_multiplier_path(&profile, &ws.bin, &kmat)?;
    let out = if spec.requires_complex() {
        let op = PreparedOp::<CRat>::new(spec.clone(), params)?;
        apply_op_sq(&op, &embed_table_crat(&table))?
    } else if spec.value_kind() == ValueKind::SquaredModulus {
        let op = PreparedOp::<Rat>::new(spec.clone(), params)?;
        apply_op_sq(&op, &table)?
    } else {
        let op = PreparedOp::<Rat>::new(spec.clone(), params)?;
        apply_op_plain(&op, &table)?
    };
    Ok(rows_exact(&out.values.vals, &out.achievers))
}

fn eval_float(
    spec: &OpSpec,
    params: GroupParams,
    input: &EvalInput,
    ws: &Workspace,
) -> Result<Vec<EvalRow>> {
    let profile = profile_float(params, input, ws)?;
    let tensor = TransitionTensor::build(params, &ws.bin);
    let table = ConvTable::from_transition(&profile, &tensor)?;
    let out = if spec.requires_complex() {
        let op = PreparedOp::<C64>::new(spec.clone(), params)?;
        apply_op_sq(&op, &embed_table_c64(&table))?
    } else if spec.value_kind() == ValueKind::SquaredModulus {
        let op = PreparedOp::<f64>::new(spec.clone(), params)?;
        apply_op_sq(&op, &table)?
    } else {
        let op = PreparedOp::<f64>::new(spec.clone(), params)?;
        apply_op_plain(&op, &table)?
    };
    Ok(rows_float(&out.values.vals, &out.achievers))
}

pub fn cmd_eval(op_id: &str, input_arg: &str, rc: &Resolved) -> Result<i32> {
    let spec = OpSpec::parse(op_id).map_err(|e| {
        anyhow!("{e}; known operators: M, ML, MD, MSL, MSD, Sstar:a:b, Tstar:a:b, Rt:t, RtD:t")
    })?;
    let input = EvalInput::parse(input_arg)?;
    let params = rc.single_params()?;
    if rc.dry_run {
        println!("{}", rc.describe_plan(&format!("eval {}", spec.id())));
        println!("  operator: {}", spec.id());
        println!("  input: {}", input.describe());
        println!(
            "  group: Z_{}^{} ({} radii)",
            params.q(),
            params.n(),
            params.n() + 1
        );
        println!("(dry run: nothing computed, nothing written)");
        return Ok(0);
    }
    if rc.precision == Precision::Exact && params.n() > 256 {
        bail!(
            "exact evaluation is capped at N = 256 (got N = {}); rerun with --precision float",
            params.n()
        );
    }
    let start = Instant::now();
    let _lock = OutDirLock::acquire(&rc.out)?;
    let ws = Workspace::new(params.n());
    let rows = match rc.precision {
        Precision::Exact => eval_exact(&spec, params, &input, &ws)?,
        Precision::Float => eval_float(&spec, params, &input, &ws)?,
    };

    let dir = rc.out.join("eval");
    fs::create_dir_all(&dir)?;
    let base = spec.id().replace(':', "_");
    let mut csv = String::from("r,value,achiever\n");
    for row in &rows {
        let a = row.achiever.map(|k| k.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{a}\n", row.r, row.cell));
    }
    let csv_rel = format!("eval/{base}.csv");
    fs::write(dir.join(format!("{base}.csv")), csv)?;
    let mut outputs = vec![csv_rel.clone()];

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.plot.is_finite())
        .map(|r| (r.r as f64, r.plot))
        .collect();
    if points.len() >= 2 {
        let series = [Series {
            label: spec.id(),
            points,
        }];
        let title = format!("{} on {} over Z_{}^{}", spec.id(), input.describe(), params.q(), params.n());
        fs::write(dir.join(format!("{base}.dat")), render_dat(&series))?;
        outputs.push(format!("eval/{base}.dat"));
        fs::write(
            dir.join(format!("{base}.plt")),
            render_plt(
                &title,
                "r",
                "value",
                &format!("{base}.dat"),
                &format!("{base}_render.svg"),
                &series,
            ),
        )?;
        outputs.push(format!("eval/{base}.plt"));
        if rc.svg {
            fs::write(
                dir.join(format!("{base}.svg")),
                render_svg(&title, "r", "value", &series),
            )?;
            outputs.push(format!("eval/{base}.svg"));
        }
    }

    println!(
        "{} applied to {} on Z_{}^{} ({} arithmetic)",
        spec.id(),
        input.describe(),
        params.q(),
        params.n(),
        rc.precision.name()
    );
    if spec.value_kind() == ValueKind::SquaredModulus {
        println!("(values are squared moduli)");
    }
    if params.n() <= 32 {
        for row in &rows {
            let a = row
                .achiever
                .map(|k| format!("   (k = {k})"))
                .unwrap_or_default();
            println!("  r={:<3} {}{a}", row.r, row.display);
        }
    }
    let wall = start.elapsed().as_secs_f64();
    write_manifest(rc, &format!("eval {}", spec.id()), Vec::new(), outputs, wall)?;
    println!("wrote {}", rc.out.join(csv_rel).display());
    Ok(0)
}

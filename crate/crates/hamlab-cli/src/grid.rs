//! Argument parsing for grids and numeric knobs: comma lists, ranges with
//! arithmetic or geometric steps, rationals, and per-suite threshold
//! overrides.

use anyhow::{anyhow, bail, ensure, Context, Result};
use hamlab::bounds::suite_ids;
use hamlab::Rat;
use num::BigInt;

/// Parse a grid list: comma-separated atoms, each an integer or a range.
///
/// Range forms for `a..b`:
/// - `a..b:s`  — arithmetic with step `s`;
/// - `a..b:xq` — geometric with factor `q`;
/// - bare `a..b` — arithmetic with step 1, except that a wide span
///   (`b >= 4a`) doubles instead, so `16..256` means 16, 32, 64, 128, 256.
///   Use an explicit `:1` to force a wide arithmetic range.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for atom in s.split(',') {
        let atom = atom.trim();
        ensure!(!atom.is_empty(), "empty entry in list {s:?}");
        if let Some((a, rest)) = atom.split_once("..") {
            let vals = parse_range(a, rest).with_context(|| format!("range {atom:?}"))?;
            out.extend(vals);
        } else {
            let v: u64 = atom
                .parse()
                .with_context(|| format!("integer {atom:?}"))?;
            out.push(v);
        }
    }
    ensure!(!out.is_empty(), "list {s:?} resolves to nothing");
    Ok(out)
}

fn parse_range(a: &str, rest: &str) -> Result<Vec<u64>> {
    let (b_str, step) = match rest.split_once(':') {
        Some((b, st)) => (b, Some(st.trim())),
        None => (rest, None),
    };
    let a: u64 = a.trim().parse().context("range start")?;
    let b: u64 = b_str.trim().parse().context("range end")?;
    ensure!(
        a >= 1 && a <= b,
        "range needs 1 <= start <= end, got {a}..{b}"
    );
    match step {
        Some(st) if st.starts_with('x') || st.starts_with('X') => {
            let q: u64 = st[1..].parse().context("geometric factor")?;
            ensure!(q >= 2, "geometric factor must be >= 2, got {q}");
            Ok(geometric(a, b, q))
        }
        Some(st) => {
            let s: u64 = st.parse().context("step")?;
            ensure!(s >= 1, "step must be >= 1");
            Ok((a..=b).step_by(s as usize).collect())
        }
        None if b >= 4 * a => Ok(geometric(a, b, 2)),
        None => Ok((a..=b).collect()),
    }
}

fn geometric(a: u64, b: u64, q: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut x = a;
    while x <= b {
        v.push(x);
        match x.checked_mul(q) {
            Some(y) => x = y,
            None => break,
        }
    }
    v
}

/// Alphabet parameters `m >= 1`.
pub fn parse_ms(s: &str) -> Result<Vec<u32>> {
    parse_grid(s)?
        .into_iter()
        .map(|v| {
            let m = u32::try_from(v).map_err(|_| anyhow!("m = {v} is out of range"))?;
            ensure!(m >= 1, "m must be >= 1, got {m}");
            Ok(m)
        })
        .collect()
}

/// Positive dimension-like lists (`--n`, `--t`).
pub fn parse_positive_usizes(s: &str) -> Result<Vec<usize>> {
    parse_grid(s)?
        .into_iter()
        .map(|v| {
            ensure!(v >= 1, "value must be >= 1, got {v}");
            Ok(v as usize)
        })
        .collect()
}

/// Norm exponents: comma-separated floats, each finite and > 1.
pub fn parse_exponents(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for atom in s.split(',') {
        let atom = atom.trim();
        let p: f64 = atom
            .parse()
            .with_context(|| format!("exponent {atom:?}"))?;
        ensure!(p.is_finite() && p > 1.0, "exponent must be > 1, got {atom}");
        out.push(p);
    }
    ensure!(!out.is_empty(), "exponent list {s:?} is empty");
    Ok(out)
}

/// An exact rational: integer (`-2`), slash form (`2/3`), or terminating
/// decimal (`0.25`).
pub fn parse_rational(s: &str) -> Result<Rat> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    ensure!(!body.is_empty(), "empty rational");
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|c| c.is_ascii_digit());
    let mag = if let Some((p, q)) = body.split_once('/') {
        ensure!(digits(p) && digits(q), "malformed rational {t:?}");
        let den: BigInt = q.parse()?;
        ensure!(!num::Zero::is_zero(&den), "zero denominator in {t:?}");
        Rat::new(p.parse()?, den)
    } else if let Some((i, f)) = body.split_once('.') {
        ensure!(
            (i.is_empty() || digits(i)) && digits(f),
            "malformed decimal {t:?}"
        );
        let whole: BigInt = format!("0{i}{f}").parse()?;
        let scale = num::pow::pow(BigInt::from(10), f.len());
        Rat::new(whole, scale)
    } else {
        ensure!(digits(body), "malformed rational {t:?}");
        Rat::from_integer(body.parse()?)
    };
    Ok(if neg { -mag } else { mag })
}

/// `SUITE=VALUE` overrides, validated against the known suite ids.
pub fn parse_thresholds(raw: &[String]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for item in raw {
        let Some((suite, val)) = item.split_once('=') else {
            bail!("threshold {item:?} is not of the form SUITE=VALUE");
        };
        let suite = suite.trim();
        ensure!(
            suite_ids().contains(&suite),
            "unknown suite {suite:?} in threshold override; known suites: {}",
            suite_ids().join(", ")
        );
        let v: f64 = val
            .trim()
            .parse()
            .with_context(|| format!("threshold value in {item:?}"))?;
        ensure!(v.is_finite() && v > 0.0, "threshold must be positive, got {val}");
        out.push((suite.to_string(), v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hamlab::scalar::rat;

    #[test]
    fn ranges_resolve_with_the_documented_step_rules() {
        assert_eq!(parse_grid("3..8").unwrap(), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(parse_grid("16..256").unwrap(), vec![16, 32, 64, 128, 256]);
        assert_eq!(parse_grid("1..16").unwrap(), vec![1, 2, 4, 8, 16]);
        assert_eq!(
            parse_grid("1..16:1").unwrap(),
            (1..=16).collect::<Vec<u64>>()
        );
        assert_eq!(parse_grid("2..10:3").unwrap(), vec![2, 5, 8]);
        assert_eq!(parse_grid("8..64:x2").unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(parse_grid("5..500:x10").unwrap(), vec![5, 50, 500]);
        assert_eq!(parse_grid("4,8..12:2").unwrap(), vec![4, 8, 10, 12]);
        assert!(parse_grid("8..4").is_err());
        assert!(parse_grid("").is_err());
        assert!(parse_grid("2..8:x1").is_err());
    }

    #[test]
    fn rationals_cover_integer_slash_and_decimal_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-2.5").unwrap(), rat(-5, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn threshold_overrides_validate_suite_names() {
        let ok = parse_thresholds(&["square-sum=5".into(), "norms=2.5".into()]).unwrap();
        assert_eq!(ok[0], ("square-sum".to_string(), 5.0));
        assert_eq!(ok[1], ("norms".to_string(), 2.5));
        assert!(parse_thresholds(&["bogus=1".into()]).is_err());
        assert!(parse_thresholds(&["decay".into()]).is_err());
        assert!(parse_thresholds(&["decay=-1".into()]).is_err());
    }
}

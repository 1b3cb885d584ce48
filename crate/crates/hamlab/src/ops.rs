//! The operator zoo: maximal sphere averages, maximal Cesàro means (real
//! and complex order, local and distant), and difference square functions —
//! all evaluated radius-by-radius from one shared convolution table.
//!
//! Every operator value at a point is a function of the vector
//! `col[k] = (f ∗ σ_k)(x)`, `k = 0..=N`. The table provider decides how that
//! vector is computed (exact multiplier transform, all-positive transition
//! matrices, or brute-force group convolution); the per-radius combiner is
//! the *same code* for every provider, so equivalence tests compare like
//! for like.

use crate::combin::{big_pow, binom_big, Binomials, Rat, Workspace};
use crate::error::{Error, Result};
use crate::group::{check_params, DenseDomain, GroupFunction};
use crate::group::{GroupParams, RepConvs};
use crate::radial::{
    kernel_multiplier, multiplier_to_profile, Family, Multiplier, RadialProfile,
};
use crate::scalar::{rat_big, rat_int, RealScalar, Scalar};
use num::{BigInt, Complex, Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

/// Which operator family a registry id denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// `M`: max of `|f ∗ σ_k|` over every radius `k = 0..=N`.
    FullMax,
    /// `ML`: max over the local range `k ≤ floor(c_m N)`.
    LocalMax,
    /// `MD`: max of `|f ∗ σ_{N−k}|` over `k ≤ floor(N/(m+1))`.
    DistantMax,
    /// `MSL`: max over `n` of the running average `|Σ_{k≤n} f ∗ σ_k|/(n+1)`.
    LocalAvgMax,
    /// `MSD`: distant counterpart of `MSL`.
    DistantAvgMax,
    /// `Sstar:α:β`: max over `n` of the order-`λ` weighted sum
    /// `|Σ_{k≤n} A^λ_{n−k} f ∗ σ_k| / (n+1)^{α+1}`, `λ = α + iβ`.
    LocalCesaroMax,
    /// `Tstar:α:β`: distant counterpart of `Sstar`.
    DistantCesaroMax,
    /// `Rt:t`: square function
    /// `Σ_{k=0}^{cutoff} (k+1)^{2t−1} |Σ_{j≤min(t,k)} (−1)^j C(t,j) (f ∗ σ_{k−j})|²`
    /// — from `k ≥ t` the inner sum is the full `t`-th difference of the
    /// sphere averages (reported as the squared value).
    LocalSquare,
    /// `RtD:t`: distant counterpart of `Rt`.
    DistantSquare,
}

/// How an operator natively reports its values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    /// A nonnegative real value.
    Plain,
    /// The squared modulus of the underlying value (square functions, and
    /// complex-order maximal functions whose values are moduli).
    SquaredModulus,
}

/// A parsed operator id: kind plus its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSpec {
    pub kind: OpKind,
    /// Real part of the Cesàro order (Sstar/Tstar only).
    pub alpha: Rat,
    /// Imaginary part of the Cesàro order (Sstar/Tstar only).
    pub beta: Rat,
    /// Difference order (Rt/RtD only).
    pub t: usize,
}

impl OpSpec {
    fn bare(kind: OpKind) -> Self {
        Self {
            kind,
            alpha: Rat::zero(),
            beta: Rat::zero(),
            t: 0,
        }
    }

    pub fn m() -> Self {
        Self::bare(OpKind::FullMax)
    }
    pub fn ml() -> Self {
        Self::bare(OpKind::LocalMax)
    }
    pub fn md() -> Self {
        Self::bare(OpKind::DistantMax)
    }
    pub fn msl() -> Self {
        Self::bare(OpKind::LocalAvgMax)
    }
    pub fn msd() -> Self {
        Self::bare(OpKind::DistantAvgMax)
    }
    pub fn sstar(alpha: Rat, beta: Rat) -> Self {
        Self {
            kind: OpKind::LocalCesaroMax,
            alpha,
            beta,
            t: 0,
        }
    }
    pub fn tstar(alpha: Rat, beta: Rat) -> Self {
        Self {
            kind: OpKind::DistantCesaroMax,
            alpha,
            beta,
            t: 0,
        }
    }
    pub fn rt(t: usize) -> Self {
        Self {
            kind: OpKind::LocalSquare,
            alpha: Rat::zero(),
            beta: Rat::zero(),
            t,
        }
    }
    pub fn rtd(t: usize) -> Self {
        Self {
            kind: OpKind::DistantSquare,
            alpha: Rat::zero(),
            beta: Rat::zero(),
            t,
        }
    }

    /// Parse a registry id such as `"M"`, `"Sstar:-1:0"`, `"Sstar:0.5:1"`,
    /// `"Rt:2"`.
    pub fn parse(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownOperator { id: id.to_string() };
        let parts: Vec<&str> = id.split(':').collect();
        match parts.as_slice() {
            ["M"] => Ok(Self::m()),
            ["ML"] => Ok(Self::ml()),
            ["MD"] => Ok(Self::md()),
            ["MSL"] => Ok(Self::msl()),
            ["MSD"] => Ok(Self::msd()),
            ["Sstar", a, b] => {
                let alpha = parse_rat_component(a).ok_or_else(unknown)?;
                let beta = parse_rat_component(b).ok_or_else(unknown)?;
                Ok(Self::sstar(alpha, beta))
            }
            ["Tstar", a, b] => {
                let alpha = parse_rat_component(a).ok_or_else(unknown)?;
                let beta = parse_rat_component(b).ok_or_else(unknown)?;
                Ok(Self::tstar(alpha, beta))
            }
            ["Rt", t] => Ok(Self::rt(t.parse().map_err(|_| unknown())?)),
            ["RtD", t] => Ok(Self::rtd(t.parse().map_err(|_| unknown())?)),
            _ => Err(unknown()),
        }
    }

    /// Canonical id string; `parse` round-trips it.
    pub fn id(&self) -> String {
        match self.kind {
            OpKind::FullMax => "M".into(),
            OpKind::LocalMax => "ML".into(),
            OpKind::DistantMax => "MD".into(),
            OpKind::LocalAvgMax => "MSL".into(),
            OpKind::DistantAvgMax => "MSD".into(),
            OpKind::LocalCesaroMax => format!(
                "Sstar:{}:{}",
                format_rat_component(&self.alpha),
                format_rat_component(&self.beta)
            ),
            OpKind::DistantCesaroMax => format!(
                "Tstar:{}:{}",
                format_rat_component(&self.alpha),
                format_rat_component(&self.beta)
            ),
            OpKind::LocalSquare => format!("Rt:{}", self.t),
            OpKind::DistantSquare => format!("RtD:{}", self.t),
        }
    }

    /// The averaging family the index runs over; `None` for the full-range
    /// maximal function.
    pub fn family(&self) -> Option<Family> {
        match self.kind {
            OpKind::FullMax => None,
            OpKind::LocalMax
            | OpKind::LocalAvgMax
            | OpKind::LocalCesaroMax
            | OpKind::LocalSquare => Some(Family::Local),
            OpKind::DistantMax
            | OpKind::DistantAvgMax
            | OpKind::DistantCesaroMax
            | OpKind::DistantSquare => Some(Family::Distant),
        }
    }

    /// Whether exact evaluation needs a complex scalar.
    pub fn requires_complex(&self) -> bool {
        matches!(
            self.kind,
            OpKind::LocalCesaroMax | OpKind::DistantCesaroMax
        ) && !self.beta.is_zero()
    }

    /// The native reporting convention for this operator's values.
    pub fn value_kind(&self) -> ValueKind {
        match self.kind {
            OpKind::LocalSquare | OpKind::DistantSquare => ValueKind::SquaredModulus,
            OpKind::LocalCesaroMax | OpKind::DistantCesaroMax if !self.beta.is_zero() => {
                ValueKind::SquaredModulus
            }
            _ => ValueKind::Plain,
        }
    }

    /// The certified operator registry, in reporting order.
    pub fn registry() -> Vec<OpSpec> {
        let z = Rat::zero;
        vec![
            Self::m(),
            Self::ml(),
            Self::md(),
            Self::msl(),
            Self::msd(),
            Self::sstar(z(), z()),
            Self::sstar(rat_int(-1), z()),
            Self::sstar(rat_int(-2), z()),
            Self::sstar(z(), rat_int(1)),
            Self::tstar(z(), z()),
            Self::tstar(rat_int(-1), z()),
            Self::tstar(rat_int(-2), z()),
            Self::tstar(z(), rat_int(1)),
            Self::rt(1),
            Self::rt(2),
            Self::rtd(1),
            Self::rtd(2),
        ]
    }
}

impl std::fmt::Display for OpSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.id())
    }
}

/// Parse an integer (`-2`), terminating decimal (`0.5`), or slash rational
/// (`2/3`) parameter component.
fn parse_rat_component(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    let mag = if let Some((p, q)) = body.split_once('/') {
        if !all_digits(p) || !all_digits(q) {
            return None;
        }
        let den: BigInt = q.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Rat::new(p.parse().ok()?, den)
    } else if let Some((i, f)) = body.split_once('.') {
        if !all_digits(i) || !all_digits(f) {
            return None;
        }
        let scale = big_pow(10, f.len());
        let whole: BigInt = i.parse().ok()?;
        let frac: BigInt = f.parse().ok()?;
        Rat::new(whole * &scale + frac, scale)
    } else {
        if !all_digits(body) {
            return None;
        }
        Rat::from_integer(body.parse().ok()?)
    };
    Some(if neg { -mag } else { mag })
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Canonical rendering of a rational id component: integer, terminating
/// decimal when the denominator is `2^a 5^b`, slash form otherwise.
fn format_rat_component(r: &Rat) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut a = 0usize;
    let mut b = 0usize;
    while d.is_multiple_of(&two) {
        d /= &two;
        a += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        b += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = a.max(b);
    let scaled = (r * Rat::from_integer(big_pow(10, k))).to_integer();
    let neg = scaled.is_negative();
    let mut digits = scaled.magnitude().to_string();
    while digits.len() <= k {
        digits.insert(0, '0');
    }
    digits.insert(digits.len() - k, '.');
    if neg {
        digits.insert(0, '-');
    }
    digits
}

/// An operator compiled against fixed group parameters: index cutoff,
/// per-gap Cesàro (or signed difference) coefficients, and normalizer
/// tables, all in the evaluation scalar.
#[derive(Clone, Debug)]
pub struct PreparedOp<S: Scalar> {
    pub spec: OpSpec,
    pub params: GroupParams,
    /// Largest family index (inclusive). Radii themselves for `M`.
    pub cutoff: usize,
    /// `A^λ_j` for Cesàro maxima, signed binomials `(−1)^j C(t,j)` for
    /// square functions, empty otherwise.
    coeffs: Vec<S>,
    /// `(n+1)^{α+1}`, when representable in this scalar.
    norm_plain: Option<Vec<S::Real>>,
    /// `(n+1)^{2α+2}`, when representable in this scalar.
    norm_sq: Option<Vec<S::Real>>,
    /// `(k+1)^{2t−1}` for square functions, empty otherwise.
    sq_weights: Vec<S::Real>,
}

/// `(n+1)^e` for `n = 0..=cutoff`, if the exponent is representable:
/// integer exponents are exact in any scalar; fractional ones only exist on
/// the float path.
fn pow_table<R: RealScalar>(cutoff: usize, e: &Rat) -> Option<Vec<R>> {
    if e.is_integer() {
        let ei = e.to_integer().to_i32()?;
        Some(
            (0..=cutoff)
                .map(|n| R::from_rational(&rat_int(n as i64 + 1).pow(ei)))
                .collect(),
        )
    } else if !R::EXACT {
        let ef = RealScalar::to_f64(e);
        Some(
            (0..=cutoff)
                .map(|n| R::from_f64(((n + 1) as f64).powf(ef)))
                .collect(),
        )
    } else {
        None
    }
}

impl<S: Scalar> PreparedOp<S> {
    pub fn new(spec: OpSpec, params: GroupParams) -> Result<Self> {
        let cutoff = match spec.family() {
            None => params.n(),
            Some(fam) => fam.cutoff(params),
        };
        let mut coeffs = Vec::new();
        let mut norm_plain = None;
        let mut norm_sq = None;
        let mut sq_weights = Vec::new();
        match spec.kind {
            OpKind::LocalCesaroMax | OpKind::DistantCesaroMax => {
                let lambda =
                    S::from_complex_rational(&spec.alpha, &spec.beta).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "operator {} has a complex order; evaluate it in a complex scalar",
                            spec.id()
                        ))
                    })?;
                coeffs = crate::radial::cesaro_coeffs(&lambda, cutoff);
                let e_plain = &spec.alpha + rat_int(1);
                let e_sq = &e_plain + &e_plain;
                norm_plain = pow_table::<S::Real>(cutoff, &e_plain);
                norm_sq = pow_table::<S::Real>(cutoff, &e_sq);
            }
            OpKind::LocalSquare | OpKind::DistantSquare => {
                coeffs = (0..=spec.t)
                    .map(|j| {
                        let c = rat_big(&binom_big(spec.t, j));
                        S::from_rational(&if j % 2 == 0 { c } else { -c })
                    })
                    .collect();
                let e = 2 * spec.t as i32 - 1;
                sq_weights = (0..=cutoff)
                    .map(|k| <S::Real as Scalar>::from_rational(&rat_int(k as i64 + 1).pow(e)))
                    .collect();
            }
            _ => {}
        }
        Ok(Self {
            spec,
            params,
            cutoff,
            coeffs,
            norm_plain,
            norm_sq,
            sq_weights,
        })
    }

    /// Sphere radius addressed by family index `k`.
    fn radius(&self, k: usize) -> usize {
        match self.spec.family() {
            None | Some(Family::Local) => k,
            Some(Family::Distant) => self.params.n() - k,
        }
    }

    fn norm_plain(&self) -> Result<&[S::Real]> {
        self.norm_plain.as_deref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "normalizer (n+1)^(α+1) for {} is not exactly representable; \
                 use the squared evaluator or the float path",
                self.spec.id()
            ))
        })
    }

    fn norm_sq(&self) -> Result<&[S::Real]> {
        self.norm_sq.as_deref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "squared normalizer (n+1)^(2α+2) for {} is not exactly representable \
                 (α must be a half-integer on the exact path)",
                self.spec.id()
            ))
        })
    }
}

/// One operator value at one point, with the maximizing family index when
/// the operator is a maximum (`None` for square functions).
#[derive(Clone, Debug, PartialEq)]
pub struct PointEval<V> {
    pub value: V,
    pub achiever: Option<usize>,
}

fn max_scan<R: RealScalar>(values: impl Iterator<Item = R>) -> PointEval<R> {
    let mut best: Option<(R, usize)> = None;
    for (i, v) in values.enumerate() {
        match &best {
            // Strict comparison keeps the first achiever on ties.
            Some((b, _)) if !(v > *b) => {}
            _ => best = Some((v, i)),
        }
    }
    let (value, idx) = best.expect("operator index range is never empty");
    PointEval {
        value,
        achiever: Some(idx),
    }
}

/// Operator value at a point from the convolution column
/// `col[k] = (f ∗ σ_k)(x)`, in the plain (non-squared) convention.
///
/// Only real-valued operators report plain values: the maxima of absolute
/// values, and Cesàro maxima with real order. Square functions refuse
/// (their native value is the squared sum); use [`point_value_sq`].
pub fn point_value_plain<R: RealScalar>(op: &PreparedOp<R>, col: &[R]) -> Result<PointEval<R>> {
    debug_assert_eq!(col.len(), op.params.n() + 1);
    match op.spec.kind {
        OpKind::FullMax | OpKind::LocalMax | OpKind::DistantMax => Ok(max_scan(
            (0..=op.cutoff).map(|k| col[op.radius(k)].abs_val()),
        )),
        OpKind::LocalAvgMax | OpKind::DistantAvgMax => {
            let mut acc = R::zero();
            Ok(max_scan((0..=op.cutoff).map(|n| {
                acc += col[op.radius(n)].clone();
                acc.abs_val() * R::from_i64_ratio(1, n as i64 + 1)
            })))
        }
        OpKind::LocalCesaroMax | OpKind::DistantCesaroMax => {
            let norm = op.norm_plain()?;
            Ok(max_scan((0..=op.cutoff).map(|n| {
                let mut s = R::zero();
                for k in 0..=n {
                    s += op.coeffs[n - k].clone() * col[op.radius(k)].clone();
                }
                s.abs_val() / norm[n].clone()
            })))
        }
        OpKind::LocalSquare | OpKind::DistantSquare => Err(Error::InvalidParameter(format!(
            "{} natively reports squared values; use the squared evaluator",
            op.spec.id()
        ))),
    }
}

/// Operator value at a point in the squared-modulus convention: the square
/// of the plain value for maxima, the squared sum for square functions.
/// Works in any scalar, including complex ones.
pub fn point_value_sq<S: Scalar>(op: &PreparedOp<S>, col: &[S]) -> Result<PointEval<S::Real>> {
    debug_assert_eq!(col.len(), op.params.n() + 1);
    match op.spec.kind {
        OpKind::FullMax | OpKind::LocalMax | OpKind::DistantMax => Ok(max_scan(
            (0..=op.cutoff).map(|k| col[op.radius(k)].mag_sq()),
        )),
        OpKind::LocalAvgMax | OpKind::DistantAvgMax => {
            let mut acc = S::zero();
            Ok(max_scan((0..=op.cutoff).map(|n| {
                acc += col[op.radius(n)].clone();
                let d = (n as i64 + 1) * (n as i64 + 1);
                acc.mag_sq() * <S::Real as Scalar>::from_i64_ratio(1, d)
            })))
        }
        OpKind::LocalCesaroMax | OpKind::DistantCesaroMax => {
            let norm = op.norm_sq()?;
            Ok(max_scan((0..=op.cutoff).map(|n| {
                let mut s = S::zero();
                for k in 0..=n {
                    s += op.coeffs[n - k].clone() * col[op.radius(k)].clone();
                }
                s.mag_sq() / norm[n].clone()
            })))
        }
        OpKind::LocalSquare | OpKind::DistantSquare => {
            // Squared aggregation Σ_k (k+1)^{2t−1} |Σ_j A^{−t−1}_{k−j} avg_j|².
            // From k ≥ t the inner sum is the full t-th difference of the
            // averages; below t it is the truncated kernel sum.
            let t = op.spec.t;
            let mut acc = <S::Real as Zero>::zero();
            for k in 0..=op.cutoff {
                let mut d = S::zero();
                for j in 0..=t.min(k) {
                    d += op.coeffs[j].clone() * col[op.radius(k - j)].clone();
                }
                acc += op.sq_weights[k].clone() * d.mag_sq();
            }
            Ok(PointEval {
                value: acc,
                achiever: None,
            })
        }
    }
}

/// Table of sphere convolutions `by_k[k] = f ∗ σ_k` of a radial input, for
/// every radius `k = 0..=N`.
#[derive(Clone, Debug)]
pub struct ConvTable<S: Scalar> {
    pub params: GroupParams,
    pub by_k: Vec<RadialProfile<S>>,
}

impl<S: Scalar> ConvTable<S> {
    /// The per-point column `col[k] = (f ∗ σ_k)(x)` for `|x| = s`.
    pub fn column(&self, s: usize) -> Vec<S> {
        self.by_k.iter().map(|p| p.vals[s].clone()).collect()
    }

    /// Build by the multiplier transform: diagonalize `f` once, then each
    /// `σ_k` costs one inverse transform. Exact for exact scalars; on the
    /// float path the inversion cancels catastrophically once `(m+1)^N`
    /// outgrows the tolerance budget, so floats should use
    /// [`ConvTable::from_transition`] beyond oracle scale.
    pub fn from_multiplier_path(
        f: &RadialProfile<S>,
        bin: &Binomials,
        kmat: &[Vec<S>],
    ) -> Result<Self> {
        let params = f.params;
        let n = params.n();
        let mf = kernel_multiplier(f, bin, kmat);
        let by_k: Vec<RadialProfile<S>> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let eig = (0..=n)
                    .map(|s| mf.eig[s].clone() * kmat[s][k].clone())
                    .collect();
                multiplier_to_profile(&Multiplier { params, eig }, bin, kmat)
            })
            .collect();
        Ok(Self { params, by_k })
    }

    /// The table of the point mass at the origin: `δ_0 ∗ σ_k = σ_k`.
    pub fn for_delta0(params: GroupParams, bin: &Binomials) -> Result<Self> {
        let by_k = (0..=params.n())
            .map(|k| crate::radial::sigma_profile::<S>(params, bin, k as i64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, by_k })
    }
}

impl ConvTable<f64> {
    /// Build through the all-positive transition tensor: no cancellation,
    /// so this is the float path that scales to large `N`.
    pub fn from_transition(f: &RadialProfile<f64>, tensor: &TransitionTensor) -> Result<Self> {
        check_params(f.params, tensor.params)?;
        let by_k = (0..=f.params.n())
            .map(|k| RadialProfile::from_vals(f.params, tensor.apply(k, &f.vals)))
            .collect();
        Ok(Self {
            params: f.params,
            by_k,
        })
    }
}

/// An operator applied to a whole radial input: value profile plus the
/// per-radius maximizing indices.
#[derive(Clone, Debug)]
pub struct OpOutput<R: RealScalar> {
    pub params: GroupParams,
    pub values: RadialProfile<R>,
    pub achievers: Vec<Option<usize>>,
}

/// Evaluate a plain-valued operator on every radius of a convolution table.
pub fn apply_op_plain<R: RealScalar>(
    op: &PreparedOp<R>,
    table: &ConvTable<R>,
) -> Result<OpOutput<R>> {
    check_params(op.params, table.params)?;
    let n = op.params.n();
    let evals: Vec<PointEval<R>> = (0..=n)
        .map(|s| point_value_plain(op, &table.column(s)))
        .collect::<Result<_>>()?;
    Ok(collect_output(op.params, evals))
}

/// Evaluate any operator in the squared-modulus convention on every radius.
pub fn apply_op_sq<S: Scalar>(
    op: &PreparedOp<S>,
    table: &ConvTable<S>,
) -> Result<OpOutput<S::Real>> {
    check_params(op.params, table.params)?;
    let n = op.params.n();
    let evals: Vec<PointEval<S::Real>> = (0..=n)
        .map(|s| point_value_sq(op, &table.column(s)))
        .collect::<Result<_>>()?;
    Ok(collect_output(op.params, evals))
}

fn collect_output<R: RealScalar>(params: GroupParams, evals: Vec<PointEval<R>>) -> OpOutput<R> {
    let mut vals = Vec::with_capacity(evals.len());
    let mut achievers = Vec::with_capacity(evals.len());
    for e in evals {
        vals.push(e.value);
        achievers.push(e.achiever);
    }
    OpOutput {
        params,
        values: RadialProfile::from_vals(params, vals),
        achievers,
    }
}

/// Square-function values (the square root of the native squared output) on
/// the float path.
pub fn square_function(op: &PreparedOp<f64>, table: &ConvTable<f64>) -> Result<RadialProfile<f64>> {
    if !matches!(op.spec.kind, OpKind::LocalSquare | OpKind::DistantSquare) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a square function",
            op.spec.id()
        )));
    }
    let out = apply_op_sq(op, table)?;
    Ok(RadialProfile::from_vals(
        op.params,
        out.values.vals.iter().map(|v| v.sqrt()).collect(),
    ))
}

/// Number of `y` on the radius-`k` sphere with `|x − y| = r`, for `|x| = s`:
/// split the support of `x` into coordinates where `y` agrees (`a`), differs
/// through another nonzero digit (`b = k+s−r−2a`), or sees a zero, and the
/// complement into fresh nonzero digits (`c = r−s+a`):
/// `Σ_a C(s,a) C(s−a,b) (m−1)^b C(N−s,c) m^c`.
pub fn sphere_pair_count(bin: &Binomials, params: GroupParams, s: usize, k: usize, r: usize) -> BigInt {
    let n = params.n() as i64;
    let m = params.m() as u64;
    let (s, k, r) = (s as i64, k as i64, r as i64);
    let a_lo = 0.max(s - r).max(k - r);
    let a_hi = s.min(n - r).min((k + s - r).div_euclid(2));
    let mut total = BigInt::zero();
    for a in a_lo..=a_hi {
        let b = k + s - r - 2 * a;
        let c = r - s + a;
        total += bin.c(s as usize, a as usize)
            * bin.c((s - a) as usize, b as usize)
            * big_pow(m - 1, b as usize)
            * bin.c((n - s) as usize, c as usize)
            * big_pow(m, c as usize);
    }
    total
}

/// The full family of sphere-to-sphere transition matrices in doubles:
/// `w[k][s][r] = sphere_pair_count(s,k,r) / |S_k|`, so that
/// `(f ∗ σ_k)(s) = Σ_r w[k][s][r] f_r`. Every summand is nonnegative, so
/// entries carry only benign relative rounding — no cancellation at any
/// dimension.
pub struct TransitionTensor {
    pub params: GroupParams,
    stride: usize,
    w: Vec<Vec<f64>>,
}

impl TransitionTensor {
    pub fn build(params: GroupParams, bin: &Binomials) -> Self {
        let n = params.n();
        let m = params.m() as u64;
        // Double-precision binomials, correctly rounded from the exact cache.
        let cb: Vec<Vec<f64>> = (0..=n)
            .map(|i| (0..=i).map(|j| big_to_f64(bin.c(i, j))).collect())
            .collect();
        let mut pm = vec![1.0f64; n + 1];
        let mut pm1 = vec![1.0f64; n + 1];
        for j in 1..=n {
            pm[j] = pm[j - 1] * m as f64;
            pm1[j] = pm1[j - 1] * (m - 1) as f64;
        }
        let w: Vec<Vec<f64>> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let inv_sphere = 1.0 / (cb[n][k] * pm[k]);
                let mut wk = vec![0.0f64; (n + 1) * (n + 1)];
                for s in 0..=n {
                    for r in 0..=n {
                        let a_lo = 0.max(s as i64 - r as i64).max(k as i64 - r as i64);
                        let a_hi = (s as i64)
                            .min(n as i64 - r as i64)
                            .min((k as i64 + s as i64 - r as i64).div_euclid(2));
                        let mut count = 0.0f64;
                        for a in a_lo..=a_hi {
                            let b = (k as i64 + s as i64 - r as i64 - 2 * a) as usize;
                            let c = (r as i64 - s as i64 + a) as usize;
                            let a = a as usize;
                            count += cb[s][a] * cb[s - a][b] * pm1[b] * cb[n - s][c] * pm[c];
                        }
                        wk[s * (n + 1) + r] = count * inv_sphere;
                    }
                }
                wk
            })
            .collect();
        Self {
            params,
            stride: n + 1,
            w,
        }
    }

    /// Row `s` of the radius-`k` matrix.
    pub fn row(&self, k: usize, s: usize) -> &[f64] {
        &self.w[k][s * self.stride..(s + 1) * self.stride]
    }

    /// `out[s] = Σ_r w[k][s][r]·f[r]`.
    pub fn apply(&self, k: usize, f: &[f64]) -> Vec<f64> {
        (0..self.stride)
            .map(|s| {
                self.row(k, s)
                    .iter()
                    .zip(f)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
            })
            .collect()
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().expect("binomial fits the double range")
}

/// Brute-force table of all sphere convolutions of a dense function:
/// `out[k].values[x] = (f ∗ σ_k)(x)` for every point. O(|G|²·N) — intended
/// for small dense searches only.
pub fn dense_conv_table(
    f: &GroupFunction<f64>,
    dom: &DenseDomain,
    bin: &Binomials,
) -> Result<Vec<GroupFunction<f64>>> {
    check_params(f.params, dom.params)?;
    let n = dom.params.n();
    let inv_sphere: Vec<f64> = dom
        .params
        .sphere_sizes(bin)
        .iter()
        .map(|s| 1.0 / big_to_f64(s))
        .collect();
    let size = dom.size as usize;
    let per_point: Vec<Vec<f64>> = (0..size as u64)
        .into_par_iter()
        .map(|x| {
            let mut acc = vec![0.0f64; n + 1];
            for y in 0..dom.size {
                acc[dom.weight(y)] += f.values[dom.sub(x, y) as usize];
            }
            for (k, a) in acc.iter_mut().enumerate() {
                *a *= inv_sphere[k];
            }
            acc
        })
        .collect();
    let mut tables =
        vec![Vec::with_capacity(size); n + 1];
    for point in &per_point {
        for (k, v) in point.iter().enumerate() {
            tables[k].push(*v);
        }
    }
    tables
        .into_iter()
        .map(|vals| GroupFunction::from_values(dom.params, vals))
        .collect()
}

/// The convolution column at one dense point, from a dense table.
pub fn dense_column(tables: &[GroupFunction<f64>], x: usize) -> Vec<f64> {
    tables.iter().map(|t| t.values[x]).collect()
}

/// Like-for-like oracle check data: evaluate an operator at a brute-force
/// representative column.
pub fn rep_point_value_sq<S: Scalar>(
    op: &PreparedOp<S>,
    rep: &RepConvs<S>,
) -> Result<PointEval<S::Real>> {
    point_value_sq(op, &rep.convs)
}

/// Reinterpret a real convolution table over the complex floats: complex-
/// order operators act on real inputs through real convolutions — only the
/// Cesàro coefficients are complex.
pub fn embed_table_c64(table: &ConvTable<f64>) -> ConvTable<Complex<f64>> {
    ConvTable {
        params: table.params,
        by_k: table
            .by_k
            .iter()
            .map(|p| {
                RadialProfile::from_vals(
                    p.params,
                    p.vals.iter().map(|&v| Complex::new(v, 0.0)).collect(),
                )
            })
            .collect(),
    }
}

/// Exact-rational counterpart of [`embed_table_c64`].
pub fn embed_table_crat(table: &ConvTable<Rat>) -> ConvTable<Complex<Rat>> {
    ConvTable {
        params: table.params,
        by_k: table
            .by_k
            .iter()
            .map(|p| {
                RadialProfile::from_vals(
                    p.params,
                    p.vals
                        .iter()
                        .map(|v| Complex::new(v.clone(), Rat::zero()))
                        .collect(),
                )
            })
            .collect(),
    }
}

fn dft_roots(q: usize, sign: f64) -> Vec<Complex<f64>> {
    (0..q)
        .map(|j| {
            let ang = sign * std::f64::consts::TAU * j as f64 / q as f64;
            Complex::new(ang.cos(), ang.sin())
        })
        .collect()
}

/// In-place tensor character transform on the dense index space, one
/// `q`-point transform per coordinate axis: `O(|G|·N·q)` values touched.
/// The forward direction matches [`GroupFunction::fourier`] (`ξ^{−x·S}`);
/// the inverse includes the `(m+1)^{−N}` normalization. Chunks are disjoint,
/// so parallel execution is bit-deterministic.
fn wht_transform(vals: &mut [Complex<f64>], q: usize, n: usize, inverse: bool) {
    let roots = dft_roots(q, if inverse { 1.0 } else { -1.0 });
    let mut stride = 1usize;
    for _axis in 0..n {
        let block = stride * q;
        vals.par_chunks_mut(block).for_each(|chunk| {
            let mut buf = vec![Complex::new(0.0, 0.0); q];
            for off in 0..stride {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = chunk[off + j * stride];
                }
                for jo in 0..q {
                    let mut acc = Complex::new(0.0, 0.0);
                    for (ji, b) in buf.iter().enumerate() {
                        acc += *b * roots[(jo * ji) % q];
                    }
                    chunk[off + jo * stride] = acc;
                }
            }
        });
        stride = block;
    }
    if inverse {
        let scale = 1.0 / vals.len() as f64;
        for v in vals.iter_mut() {
            *v *= scale;
        }
    }
}

/// All sphere convolutions of a dense real input through the fast character
/// transform: `out[k][x] = (f ∗ σ_k)(x)`. `O(|G|·N²·q)` — the dense engine
/// that scales past the brute-force convolution.
pub fn wht_conv_tables(f: &[f64], dom: &DenseDomain, kmat: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let q = dom.params.q() as usize;
    let n = dom.params.n();
    debug_assert_eq!(f.len() as u64, dom.size);
    let mut fhat: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    wht_transform(&mut fhat, q, n, false);
    (0..=n)
        .map(|k| {
            let mut g: Vec<Complex<f64>> = (0..dom.size)
                .map(|x| fhat[x as usize] * kmat[dom.weight(x)][k])
                .collect();
            wht_transform(&mut g, q, n, true);
            g.iter().map(|c| c.re).collect()
        })
        .collect()
}

/// `Σ_k (v_k ∗ σ_k)` for dense inputs grouped by sphere index — the adjoint
/// step of the dense ascent (each `σ_k` is symmetric, so convolution and
/// correlation coincide).
pub fn wht_grouped_conv(groups: &[Vec<f64>], dom: &DenseDomain, kmat: &[Vec<f64>]) -> Vec<f64> {
    let q = dom.params.q() as usize;
    let n = dom.params.n();
    let size = dom.size as usize;
    debug_assert_eq!(groups.len(), n + 1);
    let mut acc = vec![Complex::new(0.0, 0.0); size];
    for (k, g) in groups.iter().enumerate() {
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut gh: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
        wht_transform(&mut gh, q, n, false);
        for (x, a) in acc.iter_mut().enumerate() {
            *a += gh[x] * kmat[dom.weight(x as u64)][k];
        }
    }
    wht_transform(&mut acc, q, n, true);
    acc.iter().map(|c| c.re).collect()
}

/// Maximum deviation between the dense Fourier transform of every sphere
/// average and its multiplier value — a joint validation of the fast
/// transform, the dense enumeration, and the Krawtchouk table. The caller
/// picks parameters small enough to enumerate.
pub fn wht_sigma_hat_check(params: GroupParams, ws: &Workspace) -> Result<f64> {
    let dom = DenseDomain::new(params, 1 << 22)?;
    let kmatf = crate::radial::kraw_matrix::<f64>(params, &ws.bin, &ws.lf);
    let q = params.q() as usize;
    let n = params.n();
    let mut worst = 0.0f64;
    for k in 0..=n {
        let sig = crate::radial::sigma_profile::<f64>(params, &ws.bin, k as i64)?;
        let mut hat: Vec<Complex<f64>> = (0..dom.size)
            .map(|x| Complex::new(sig.vals[dom.weight(x)], 0.0))
            .collect();
        wht_transform(&mut hat, q, n, false);
        for x in 0..dom.size {
            let expect = kmatf[dom.weight(x)][k];
            let dev = (hat[x as usize] - expect).norm();
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(worst)
}

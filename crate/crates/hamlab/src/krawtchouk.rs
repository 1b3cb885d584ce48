//! Normalized Krawtchouk polynomials `κ_k^N(r)` — the multipliers of the
//! spherical averages — in exact rational and cancellation-safe floating
//! arithmetic, together with their difference multipliers and the
//! dominant-summand analysis that yields the decay certificate.
//!
//! The exact alternating sum is the ground truth. The float path evaluates
//! summand magnitudes in log space, factors out the largest magnitude, and
//! combines signs with compensated summation; because the summand magnitudes
//! sum to at most 1, the absolute error stays near machine precision even at
//! `N = 4096`, where naive recurrences lose everything to cancellation.

use crate::combin::{big_pow, ln_big, ln_rat_abs, Binomials, LnFact, Rat};
use crate::error::{Error, Result};
use crate::group::GroupParams;
use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;

/// Absolute/relative tolerance the float path must certify against the
/// exact value.
pub const KRAW_FLOAT_TOL: f64 = 1e-9;

/// Exact `κ_k^N(r)` for arbitrary integer arguments: zero when any of
/// `r`, `k`, `n` is negative, and zero when the summation range is empty
/// (`r > n` or `k > n`).
pub fn kraw_exact_raw(bin: &Binomials, m: u32, n: i64, r: i64, k: i64) -> Rat {
    if n < 0 || r < 0 || k < 0 {
        return Rat::zero();
    }
    let lo = 0.max(r + k - n);
    let hi = r.min(k);
    if lo > hi {
        return Rat::zero();
    }
    // Scale by m^hi so every term is an integer: the shared denominator is
    // C(n,k)·m^hi.
    let mut t = BigInt::zero();
    for j in lo..=hi {
        let term = bin.c_signed(r, j) * bin.c_signed(n - r, k - j) * big_pow(m as u64, (hi - j) as usize);
        if j % 2 == 0 {
            t += term;
        } else {
            t -= term;
        }
    }
    let d = bin.c_signed(n, k) * big_pow(m as u64, hi as usize);
    Rat::new(t, d)
}

/// Exact `κ_k^N(r)` on a group: the multiplier of the L¹ sphere average
/// `σ_k` at frequency weight `r`.
pub fn kraw_sum(bin: &Binomials, params: GroupParams, k: i64, r: i64) -> Rat {
    kraw_exact_raw(bin, params.m(), params.n() as i64, r, k)
}

/// Float evaluation with an a-priori error estimate.
#[derive(Clone, Copy, Debug)]
pub struct KrawFloat {
    pub value: f64,
    /// Sum of summand magnitudes (≤ 1); the scale cancellation happens at.
    pub sum_abs: f64,
    /// Conservative absolute error estimate.
    pub abs_err: f64,
}

/// Cancellation-safe float `κ_k^N(r)` for `0 ≤ r, k ≤ N`.
///
/// Magnitudes are formed in log space from compensated log-factorials, the
/// largest magnitude is factored out, and the alternating combination uses
/// Kahan summation, so the absolute error is bounded by a small multiple of
/// machine epsilon times the magnitude sum.
pub fn kraw_float_parts(lf: &LnFact, m: u32, n: usize, r: usize, k: usize) -> KrawFloat {
    assert!(r <= n && k <= n, "kraw_float needs 0 <= r, k <= N");
    let (r64, k64, n64) = (r as i64, k as i64, n as i64);
    let lo = 0.max(r64 + k64 - n64) as usize;
    let hi = r.min(k);
    let ln_m = (m as f64).ln();
    let ln_denom = lf.ln_binom(n, k);
    let mut ln_terms = Vec::with_capacity(hi + 1 - lo);
    let mut ln_max = f64::NEG_INFINITY;
    for j in lo..=hi {
        let t = lf.ln_binom(r, j) + lf.ln_binom(n - r, k - j) - ln_denom - j as f64 * ln_m;
        ln_max = ln_max.max(t);
        ln_terms.push(t);
    }
    if ln_max == f64::NEG_INFINITY {
        return KrawFloat {
            value: 0.0,
            sum_abs: 0.0,
            abs_err: 0.0,
        };
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut sum_abs = 0.0f64;
    for (idx, lt) in ln_terms.iter().enumerate() {
        let j = lo + idx;
        let mag = (lt - ln_max).exp();
        sum_abs += mag;
        let term = if j % 2 == 0 { mag } else { -mag };
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let scale = ln_max.exp();
    let terms = (hi + 1 - lo) as f64;
    // Error budget: Kahan recombination (a few eps per term) plus the
    // log-table error, which is a few ulps of the largest log magnitude.
    let ln_scale = lf.ln_fact(n).max(1.0);
    let abs_err = scale * sum_abs * ((terms + 4.0) * f64::EPSILON + 8.0 * f64::EPSILON * ln_scale);
    KrawFloat {
        value: scale * sum,
        sum_abs: scale * sum_abs,
        abs_err,
    }
}

/// Float `κ_k^N(r)` that refuses to return a value whose internal error
/// estimate exceeds [`KRAW_FLOAT_TOL`].
pub fn kraw_float(lf: &LnFact, params: GroupParams, k: usize, r: usize) -> Result<f64> {
    let parts = kraw_float_parts(lf, params.m(), params.n(), r, k);
    if parts.abs_err > KRAW_FLOAT_TOL {
        return Err(Error::LossOfPrecision {
            bound: parts.abs_err,
            tol: KRAW_FLOAT_TOL,
            context: "float Krawtchouk evaluation",
        });
    }
    Ok(parts.value)
}

/// Exact `(N+1)×(N+1)` table, entry `(r, k) = κ_k^N(r)`.
#[derive(Clone, Debug)]
pub struct KrawtchoukTable {
    pub params: GroupParams,
    values: Vec<Vec<Rat>>,
}

impl KrawtchoukTable {
    pub fn new(bin: &Binomials, params: GroupParams) -> Self {
        let n = params.n();
        let values: Vec<Vec<Rat>> = (0..=n as i64)
            .into_par_iter()
            .map(|r| {
                (0..=n as i64)
                    .map(|k| kraw_sum(bin, params, k, r))
                    .collect()
            })
            .collect();
        Self { params, values }
    }

    pub fn get(&self, r: usize, k: usize) -> &Rat {
        &self.values[r][k]
    }

    /// Row `r` over all `k` (equivalently column `r`, by symmetry).
    pub fn row(&self, r: usize) -> &[Rat] {
        &self.values[r]
    }
}

/// Float table with the worst per-entry error estimate.
#[derive(Clone, Debug)]
pub struct KrawtchoukTableF64 {
    pub params: GroupParams,
    values: Vec<Vec<f64>>,
    pub max_abs_err: f64,
}

impl KrawtchoukTableF64 {
    pub fn new(lf: &LnFact, params: GroupParams) -> Self {
        let n = params.n();
        let rows: Vec<(Vec<f64>, f64)> = (0..=n)
            .into_par_iter()
            .map(|r| {
                let mut row = Vec::with_capacity(n + 1);
                let mut err = 0.0f64;
                for k in 0..=n {
                    let p = kraw_float_parts(lf, params.m(), n, r, k);
                    err = err.max(p.abs_err);
                    row.push(p.value);
                }
                (row, err)
            })
            .collect();
        let max_abs_err = rows.iter().map(|(_, e)| *e).fold(0.0, f64::max);
        Self {
            params,
            values: rows.into_iter().map(|(r, _)| r).collect(),
            max_abs_err,
        }
    }

    pub fn get(&self, r: usize, k: usize) -> f64 {
        self.values[r][k]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r]
    }
}

/// Multiplier of the `t`-th backward difference of the local averaging
/// family at index `k`, evaluated at frequency weight `r`:
/// `(-1/c_m)^t · (C(N-t, r-t)/C(N, r)) · κ_{r-t}^{N-t}(k-t)`.
///
/// Zero when `r < t`; the closed form requires `0 ≤ t ≤ k`.
pub fn diff_multiplier(
    bin: &Binomials,
    params: GroupParams,
    t: usize,
    k: usize,
    r: usize,
) -> Result<Rat> {
    if t > k {
        return Err(Error::DiffOrderExceedsIndex { t, k });
    }
    if k > params.n() {
        return Err(Error::InvalidParameter(format!(
            "averaging index k = {k} exceeds N = {}",
            params.n()
        )));
    }
    let n = params.n() as i64;
    let (t64, k64, r64) = (t as i64, k as i64, r as i64);
    if r64 < t64 {
        return Ok(Rat::zero());
    }
    let front = Rat::new(
        BigInt::from(-(params.m() as i64 + 1)),
        BigInt::from(params.m()),
    )
    .pow(t as i32);
    let ratio = Rat::new(
        bin.c_signed(n - t64, r64 - t64).clone(),
        bin.c_signed(n, r64).clone(),
    );
    let kappa = kraw_exact_raw(bin, params.m(), n - t64, r64 - t64, k64 - t64);
    Ok(front * ratio * kappa)
}

/// Magnitude of the multiplier of the `t`-th backward difference of the
/// distant averaging family at index `k`, frequency weight `r`:
/// `(1/c_m)^t · (C(N-t, r-t)/C(N, r)) · |κ_{r-t}^{N-t}(N-k)|`.
pub fn distant_diff_multiplier_mag(
    bin: &Binomials,
    params: GroupParams,
    t: usize,
    k: usize,
    r: usize,
) -> Result<Rat> {
    if t > k {
        return Err(Error::DiffOrderExceedsIndex { t, k });
    }
    if k > params.n() {
        return Err(Error::InvalidParameter(format!(
            "averaging index k = {k} exceeds N = {}",
            params.n()
        )));
    }
    let n = params.n() as i64;
    let (t64, k64, r64) = (t as i64, k as i64, r as i64);
    if r64 < t64 {
        return Ok(Rat::zero());
    }
    let front = Rat::new(
        BigInt::from(params.m() as i64 + 1),
        BigInt::from(params.m()),
    )
    .pow(t as i32);
    let ratio = Rat::new(
        bin.c_signed(n - t64, r64 - t64).clone(),
        bin.c_signed(n, r64).clone(),
    );
    let kappa = kraw_exact_raw(bin, params.m(), n - t64, r64 - t64, n - k64).abs();
    Ok(front * ratio * kappa)
}

/// Per-summand unimodality data of the Krawtchouk alternating sum for one
/// `(m, N, r, k)` with `r ≤ k`.
#[derive(Clone, Debug)]
pub struct SummandAnalysis {
    pub m: u32,
    pub n_dim: usize,
    pub r: usize,
    pub k: usize,
    /// Lowest summation index `ℓ = max(0, r+k−N)`.
    pub ell: usize,
    /// Magnitudes `a_ℓ .. a_r` (with `r ≤ k`, the top index is `r`).
    pub a: Vec<Rat>,
    /// Least index of maximal magnitude.
    pub peak: usize,
    /// Crossover root `C + sqrt(C²+A)` of the consecutive-ratio equation,
    /// when it is real and lies in `(ℓ−1, r]`; the peak then equals its
    /// ceiling.
    pub j_crossover: Option<f64>,
    /// Constant `A = (rk − Nm + rm + km − m)/(m−1)` of the crossover
    /// quadratic.
    pub a_quad: Rat,
    /// Constant `C = (r+k)/2 − m/(m−1) − Nm/(2(m−1))`.
    pub c_quad: Rat,
}

impl SummandAnalysis {
    /// Magnitude `a_j`, zero outside the summation range.
    pub fn magnitude(&self, j: usize) -> Rat {
        if j < self.ell || j > self.ell + self.a.len() - 1 {
            Rat::zero()
        } else {
            self.a[j - self.ell].clone()
        }
    }

    /// Consecutive-magnitude ratio
    /// `R(j) = a_{j+1}/a_j = (r−j)(k−j) / (m (j+1) (j+1+N−r−k))`, exact.
    pub fn ratio(&self, j: usize) -> Rat {
        let (r, k, n, m) = (
            self.r as i64,
            self.k as i64,
            self.n_dim as i64,
            self.m as i64,
        );
        let j = j as i64;
        let num = BigInt::from((r - j) * (k - j));
        let den = BigInt::from(m * (j + 1) * (j + 1 + n - r - k));
        Rat::new(num, den)
    }
}

/// Analyze the summand magnitudes
/// `a_j = C(N,k)^{-1} C(r,j) C(N−r,k−j) m^{−j}` for `0 ≤ r ≤ k ≤ N`.
///
/// Requires `m ≥ 2`: on the hypercube the crossover quadratic degenerates
/// (its leading coefficient is `m−1`).
pub fn summand_analysis(
    bin: &Binomials,
    params: GroupParams,
    r: usize,
    k: usize,
) -> Result<SummandAnalysis> {
    let (m, n) = (params.m(), params.n());
    if !(r <= k && k <= n) {
        return Err(Error::InvalidParameter(format!(
            "summand analysis needs 0 <= r <= k <= N, got r={r} k={k} N={n}"
        )));
    }
    if m < 2 {
        return Err(Error::HypercubeDegenerate {
            context: "summand crossover quadratic has leading coefficient m-1",
        });
    }
    let (r64, k64, n64, m64) = (r as i64, k as i64, n as i64, m as i64);
    let ell = 0.max(r64 + k64 - n64) as usize;
    let denom = Rat::from_integer(bin.c(n, k).clone());
    let mut a = Vec::with_capacity(r + 1 - ell);
    for j in ell..=r {
        let num = bin.c(r, j) * bin.c_signed(n64 - r64, k64 - j as i64);
        let term = Rat::new(num, big_pow(m as u64, j)) / denom.clone();
        a.push(term);
    }
    // Least argmax by direct scan, with a unimodality audit.
    let mut peak = 0usize;
    for (i, v) in a.iter().enumerate() {
        if v > &a[peak] {
            peak = i;
        }
    }
    for i in 0..peak {
        if a[i + 1] < a[i] {
            return Err(Error::Internal(format!(
                "summand magnitudes not nondecreasing before the peak at (m={m}, N={n}, r={r}, k={k}, j={})",
                ell + i
            )));
        }
    }
    for i in peak..a.len() - 1 {
        if a[i + 1] > a[i] {
            return Err(Error::Internal(format!(
                "summand magnitudes not nonincreasing after the peak at (m={m}, N={n}, r={r}, k={k}, j={})",
                ell + i
            )));
        }
    }
    let peak = ell + peak;

    // Crossover quadratic constants.
    let a_quad = Rat::new(
        BigInt::from(r64 * k64 - n64 * m64 + r64 * m64 + k64 * m64 - m64),
        BigInt::from(m64 - 1),
    );
    let c_quad = Rat::new(BigInt::from(r64 + k64), BigInt::from(2))
        - Rat::new(BigInt::from(m64), BigInt::from(m64 - 1))
        - Rat::new(BigInt::from(n64 * m64), BigInt::from(2 * (m64 - 1)));
    let disc = &c_quad * &c_quad + &a_quad;

    let j_crossover = if disc.is_negative() {
        None
    } else {
        // Exact interval membership j in (ell-1, r]: compare sqrt(disc)
        // against the rational endpoints squared, avoiding float fuzz.
        let in_range = |root_plus: bool| -> bool {
            let lo = Rat::from_integer(BigInt::from(ell as i64 - 1));
            let hi = Rat::from_integer(BigInt::from(r64));
            // root = C ± sqrt(disc). Membership lo < root <= hi.
            let (lo_gap, hi_gap) = (&lo - &c_quad, &hi - &c_quad);
            if root_plus {
                // sqrt(disc) > lo_gap and sqrt(disc) <= hi_gap
                let above_lo = lo_gap.is_negative() || &disc > &(&lo_gap * &lo_gap);
                let below_hi = !hi_gap.is_negative() && &disc <= &(&hi_gap * &hi_gap);
                above_lo && below_hi
            } else {
                // root_minus = C − sqrt(disc): lo < C − s <= hi
                // ⟺ s < C − lo and s >= C − hi
                let (lo_gap2, hi_gap2) = (&c_quad - &lo, &c_quad - &hi);
                let below = lo_gap2.is_positive() && &disc < &(&lo_gap2 * &lo_gap2);
                let above = hi_gap2.is_negative()
                    || hi_gap2.is_zero()
                    || &disc >= &(&hi_gap2 * &hi_gap2);
                below && above
            }
        };
        let c_f = crate::scalar::RealScalar::to_f64(&c_quad);
        let s_f = crate::scalar::RealScalar::to_f64(&disc).sqrt();
        if in_range(true) {
            Some(c_f + s_f)
        } else if in_range(false) {
            Some(c_f - s_f)
        } else {
            None
        }
    };

    Ok(SummandAnalysis {
        m,
        n_dim: n,
        r,
        k,
        ell,
        a,
        peak,
        j_crossover,
        a_quad,
        c_quad,
    })
}

/// Decay exponent `d(r,k,N) = −N·ln|κ_k^N(r)| / (r·k)` from an exact
/// Krawtchouk value; `+inf` when the value is exactly zero.
pub fn decay_exponent_from_value(n: usize, r: usize, k: usize, kappa: &Rat) -> f64 {
    assert!(r >= 1 && k >= 1, "decay exponent needs 1 <= r, k");
    if kappa.is_zero() {
        return f64::INFINITY;
    }
    -(n as f64) * ln_rat_abs(kappa) / (r as f64 * k as f64)
}

/// Decay exponent computed from scratch.
pub fn decay_exponent(bin: &Binomials, params: GroupParams, r: usize, k: usize) -> f64 {
    let kappa = kraw_sum(bin, params, k as i64, r as i64);
    decay_exponent_from_value(params.n(), r, k, &kappa)
}

/// One violated instance inside [`dominant_bound_check`], with enough
/// provenance to reproduce it.
#[derive(Clone, Debug)]
pub struct DominantViolation {
    pub m: u32,
    pub n_dim: usize,
    pub r: usize,
    pub k: usize,
    pub what: String,
}

/// Exhaustive exact audit of the dominant-summand machinery for one
/// `(m, N)`.
#[derive(Clone, Debug)]
pub struct DominantReport {
    pub params: GroupParams,
    pub pairs_checked: usize,
    /// Pairs with `peak > 0` and `rk ≥ 2Nm`, and the minimal
    /// `peak·N/(r·k)` over them with its witness.
    pub eligible_pairs: usize,
    pub peak_ratio_min: Option<(f64, (usize, usize))>,
    pub violations: Vec<DominantViolation>,
}

/// For every `0 ≤ r ≤ k ≤ N` verify, in exact arithmetic:
/// `|κ_k^N(r)| ≤ a_peak`; unimodality of the magnitudes; positivity of the
/// quadratic constant `A` and the ceiling characterization of the peak on
/// the eligible set (`peak > 0`, `rk ≥ 2Nm`); and the small-peak envelope
/// `a_0 ≤ ((N−r)/N)^k ≤ e^{−rk/N}` whenever the peak sits at zero and
/// `r ≥ 1`. Records the minimal `peak·N/(rk)` over the eligible set.
pub fn dominant_bound_check(bin: &Binomials, params: GroupParams) -> Result<DominantReport> {
    let (m, n) = (params.m(), params.n());
    if m < 2 {
        return Err(Error::HypercubeDegenerate {
            context: "dominant-summand audit",
        });
    }
    let pairs: Vec<(usize, usize)> = (0..=n)
        .flat_map(|r| (r..=n).map(move |k| (r, k)))
        .collect();
    let results: Vec<(Option<(f64, (usize, usize))>, bool, Vec<DominantViolation>)> = pairs
        .par_iter()
        .map(|&(r, k)| {
            let mut violations = Vec::new();
            let sa = match summand_analysis(bin, params, r, k) {
                Ok(sa) => sa,
                Err(e) => {
                    violations.push(DominantViolation {
                        m,
                        n_dim: n,
                        r,
                        k,
                        what: format!("analysis failed: {e}"),
                    });
                    return (None, false, violations);
                }
            };
            let kappa = kraw_sum(bin, params, k as i64, r as i64);
            let a_peak = sa.magnitude(sa.peak);
            if kappa.abs() > a_peak {
                violations.push(DominantViolation {
                    m,
                    n_dim: n,
                    r,
                    k,
                    what: format!("|κ| = {} exceeds peak magnitude {}", kappa.abs(), a_peak),
                });
            }
            let eligible = sa.peak > 0 && r * k >= 2 * n * m as usize;
            let mut ratio_min = None;
            if eligible {
                // Positivity of A on the eligible set.
                if !sa.a_quad.is_positive() {
                    violations.push(DominantViolation {
                        m,
                        n_dim: n,
                        r,
                        k,
                        what: format!("quadratic constant A = {} not positive", sa.a_quad),
                    });
                }
                ratio_min = Some((
                    sa.peak as f64 * n as f64 / (r as f64 * k as f64),
                    (r, k),
                ));
            }
            if sa.peak > 0 {
                // Ceiling characterization: R(peak−1) > 1 ≥ R(peak). When
                // the peak sits at the lowest index ℓ > 0, the magnitude
                // below it is zero and the left crossing holds vacuously.
                if sa.peak > sa.ell {
                    let above = sa.ratio(sa.peak - 1);
                    if above <= Rat::one() {
                        violations.push(DominantViolation {
                            m,
                            n_dim: n,
                            r,
                            k,
                            what: format!("ratio below peak is {above} ≤ 1"),
                        });
                    }
                }
                if sa.peak < sa.ell + sa.a.len() - 1 {
                    let at = sa.ratio(sa.peak);
                    if at > Rat::one() {
                        violations.push(DominantViolation {
                            m,
                            n_dim: n,
                            r,
                            k,
                            what: format!("ratio at peak is {at} > 1"),
                        });
                    }
                }
                if let Some(j) = sa.j_crossover {
                    let ceil = j.ceil();
                    // Guard the float ceiling only away from integer J; the
                    // rational ratio characterization above is the binding
                    // check.
                    if (j - j.round()).abs() > 1e-9 && ceil != sa.peak as f64 {
                        violations.push(DominantViolation {
                            m,
                            n_dim: n,
                            r,
                            k,
                            what: format!("ceil(J) = {ceil} but peak = {}", sa.peak),
                        });
                    }
                }
            } else if r >= 1 {
                // Peak at zero: verify the envelope exactly through the
                // rational midpoint, then the analytic exponential bound.
                let a0 = sa.magnitude(0);
                let mid = Rat::new(BigInt::from((n - r) as u64), BigInt::from(n as u64))
                    .pow(k as i32);
                if a0 > mid {
                    violations.push(DominantViolation {
                        m,
                        n_dim: n,
                        r,
                        k,
                        what: format!("a_0 = {a0} exceeds ((N-r)/N)^k = {mid}"),
                    });
                }
                if !a0.is_zero() {
                    let ln_a0 = ln_rat_abs(&a0);
                    let bound = -(r as f64) * k as f64 / n as f64;
                    if ln_a0 > bound + 1e-9 {
                        violations.push(DominantViolation {
                            m,
                            n_dim: n,
                            r,
                            k,
                            what: format!("ln a_0 = {ln_a0} exceeds -rk/N = {bound}"),
                        });
                    }
                }
            }
            (ratio_min, eligible, violations)
        })
        .collect();

    let mut peak_ratio_min: Option<(f64, (usize, usize))> = None;
    let mut eligible_pairs = 0usize;
    let mut violations = Vec::new();
    for (ratio, eligible, v) in results {
        if eligible {
            eligible_pairs += 1;
        }
        if let Some((val, wit)) = ratio {
            peak_ratio_min = match peak_ratio_min {
                None => Some((val, wit)),
                Some((best, bw)) => {
                    if val < best {
                        Some((val, wit))
                    } else {
                        Some((best, bw))
                    }
                }
            };
        }
        violations.extend(v);
    }
    Ok(DominantReport {
        params,
        pairs_checked: pairs.len(),
        eligible_pairs,
        peak_ratio_min,
        violations,
    })
}

/// `ln` of a sphere size, used by reporting paths.
pub fn ln_sphere(bin: &Binomials, params: GroupParams, r: usize) -> f64 {
    ln_big(bin.c(params.n(), r)) + r as f64 * (params.m() as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn params(m: u32, n: usize) -> GroupParams {
        GroupParams::new(m, n).unwrap()
    }

    #[test]
    fn worked_values_on_the_small_group() {
        let bin = Binomials::new(8);
        let p = params(2, 4);
        assert_eq!(kraw_sum(&bin, p, 1, 2), rat(1, 4));
        assert_eq!(kraw_sum(&bin, p, 2, 2), rat(-1, 8));
        assert_eq!(kraw_sum(&bin, p, 2, 1), rat(1, 4));
        // a_0 − a_1 + a_2 = 1/6 − 1/3 + 1/24.
        assert_eq!(rat(1, 6) - rat(1, 3) + rat(1, 24), rat(-1, 8));
        for k in 0..=4 {
            assert_eq!(kraw_sum(&bin, p, k, 0), rat_int(1));
            assert_eq!(kraw_sum(&bin, p, 0, k), rat_int(1));
        }
        // Negative arguments are zero by convention; out-of-range are empty
        // sums.
        assert_eq!(kraw_sum(&bin, p, -1, 2), rat_int(0));
        assert_eq!(kraw_sum(&bin, p, 2, -3), rat_int(0));
        assert_eq!(kraw_sum(&bin, p, 5, 2), rat_int(0));
    }

    #[test]
    fn symmetry_and_bounds_hold_exactly() {
        let bin = Binomials::new(24);
        for &(m, n) in &[(1u32, 10usize), (2, 9), (3, 8), (5, 7)] {
            let p = params(m, n);
            let table = KrawtchoukTable::new(&bin, p);
            for r in 0..=n {
                for k in 0..=n {
                    assert_eq!(table.get(r, k), table.get(k, r), "m={m} N={n} r={r} k={k}");
                    assert!(
                        table.get(r, k).abs() <= rat_int(1),
                        "m={m} N={n} r={r} k={k}: {}",
                        table.get(r, k)
                    );
                }
                // Top row alternates geometrically: κ_N^N(r) = (−1/m)^r.
                assert_eq!(table.get(r, n), &rat(-1, m as i64).pow(r as i32));
            }
        }
    }

    #[test]
    fn float_path_matches_exact_on_overlap_grid() {
        let bin = Binomials::new(32);
        let lf = LnFact::new(64);
        for &(m, n) in &[(1u32, 16usize), (2, 24), (3, 20), (4, 16)] {
            let p = params(m, n);
            for r in 0..=n {
                for k in 0..=n {
                    let exact =
                        crate::scalar::RealScalar::to_f64(&kraw_sum(&bin, p, k as i64, r as i64));
                    let parts = kraw_float_parts(&lf, m, n, r, k);
                    assert!(
                        (parts.value - exact).abs() <= 1e-12,
                        "m={m} N={n} r={r} k={k}: float {} exact {exact}",
                        parts.value
                    );
                    assert!(
                        (parts.value - exact).abs() <= parts.abs_err.max(1e-15),
                        "error estimate too optimistic at m={m} N={n} r={r} k={k}"
                    );
                    assert!(parts.sum_abs <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn float_path_stays_finite_and_certified_at_huge_n() {
        let lf = LnFact::new(4096);
        let p = params(2, 4096);
        for &(r, k) in &[(2048usize, 2048usize), (1000, 3000), (4096, 4096), (1, 4095)] {
            let v = kraw_float(&lf, p, k, r).unwrap();
            assert!(v.is_finite());
            assert!(v.abs() <= 1.0 + 1e-9, "({r},{k}): {v}");
        }
    }

    #[test]
    fn difference_multiplier_matches_literal_differences() {
        let bin = Binomials::new(16);
        let p = params(2, 4);
        // t = 1, k = 2, r = 2: κ_2(2) − κ_1(2) = −1/8 − 1/4 = −3/8.
        let lit = kraw_sum(&bin, p, 2, 2) - kraw_sum(&bin, p, 1, 2);
        assert_eq!(lit, rat(-3, 8));
        assert_eq!(diff_multiplier(&bin, p, 1, 2, 2).unwrap(), rat(-3, 8));

        // t = 0 is the plain multiplier; r < t vanishes; t > k errors.
        assert_eq!(
            diff_multiplier(&bin, p, 0, 2, 3).unwrap(),
            kraw_sum(&bin, p, 2, 3)
        );
        assert_eq!(diff_multiplier(&bin, p, 2, 3, 1).unwrap(), rat_int(0));
        assert!(matches!(
            diff_multiplier(&bin, p, 3, 2, 2),
            Err(Error::DiffOrderExceedsIndex { t: 3, k: 2 })
        ));

        // Exhaustive literal cross-check: Δ^t P^k = Σ_j (−1)^j C(t,j) P^{k−j}.
        for &(m, n) in &[(2u32, 12usize), (3, 10)] {
            let p = params(m, n);
            for t in 0..=3usize {
                for k in t..=n {
                    for r in 0..=n {
                        let closed = diff_multiplier(&bin, p, t, k, r).unwrap();
                        let mut lit = rat_int(0);
                        for j in 0..=t {
                            let c = Rat::from_integer(bin.c(t, j).clone());
                            let term = c * kraw_sum(&bin, p, (k - j) as i64, r as i64);
                            if j % 2 == 0 {
                                lit += term;
                            } else {
                                lit -= term;
                            }
                        }
                        assert_eq!(closed, lit, "m={m} N={n} t={t} k={k} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_difference_identity_reduces_dimension() {
        // κ_k^N(r) − κ_{k−1}^N(r) = (−1/c_m)(C(N−1,r−1)/C(N,r))·κ_{k−1}^{N−1}(r−1).
        let bin = Binomials::new(16);
        for &(m, n) in &[(2u32, 11usize), (4, 9)] {
            let p = params(m, n);
            let front = rat(-(m as i64 + 1), m as i64);
            for k in 1..=n {
                for r in 1..=n {
                    let lhs = kraw_sum(&bin, p, k as i64, r as i64)
                        - kraw_sum(&bin, p, k as i64 - 1, r as i64);
                    let ratio = Rat::new(
                        bin.c(n - 1, r - 1).clone(),
                        bin.c(n, r).clone(),
                    );
                    let rhs = front.clone()
                        * ratio
                        * kraw_exact_raw(&bin, m, n as i64 - 1, r as i64 - 1, k as i64 - 1);
                    assert_eq!(lhs, rhs, "m={m} N={n} k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn distant_difference_magnitude_matches_literal() {
        let bin = Binomials::new(16);
        for &(m, n) in &[(2u32, 10usize), (3, 9)] {
            let p = params(m, n);
            for t in 1..=2usize {
                for k in t..=p.distant_cutoff() {
                    for r in 0..=n {
                        // Literal: multiplier of Σ_j (−1)^j C(t,j) Q^{k−j}
                        // where Q^d has multiplier κ_r(N−d).
                        let mut lit = rat_int(0);
                        for j in 0..=t {
                            let c = Rat::from_integer(bin.c(t, j).clone());
                            let term =
                                c * kraw_sum(&bin, p, (n - (k - j)) as i64, r as i64);
                            if j % 2 == 0 {
                                lit += term;
                            } else {
                                lit -= term;
                            }
                        }
                        let mag = distant_diff_multiplier_mag(&bin, p, t, k, r).unwrap();
                        assert_eq!(lit.abs(), mag, "m={m} N={n} t={t} k={k} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn summand_analysis_reproduces_worked_example() {
        let bin = Binomials::new(8);
        let p = params(2, 4);
        let sa = summand_analysis(&bin, p, 2, 2).unwrap();
        assert_eq!(sa.ell, 0);
        assert_eq!(sa.a, vec![rat(1, 6), rat(1, 3), rat(1, 24)]);
        assert_eq!(sa.peak, 1);
        assert_eq!(sa.magnitude(1), rat(1, 3));
        assert!(kraw_sum(&bin, p, 2, 2).abs() <= sa.magnitude(sa.peak));

        // ℓ clamps at r+k−N when the sum is short.
        let sa2 = summand_analysis(&bin, p, 3, 4).unwrap();
        assert_eq!(sa2.ell, 3);

        // Hypercube is rejected.
        assert!(matches!(
            summand_analysis(&bin, params(1, 4), 1, 2),
            Err(Error::HypercubeDegenerate { .. })
        ));
    }

    #[test]
    fn decay_exponent_matches_hand_values() {
        let bin = Binomials::new(8);
        let p = params(2, 4);
        let d = decay_exponent(&bin, p, 2, 2);
        assert!((d - (8.0f64).ln()).abs() < 1e-12);

        // κ_1^2(1) at m=1: 1 − 2·1/(1·2)·... use a known zero:
        // on (m=1, N=2), κ_1(1) = (C(1,0)C(1,1) − C(1,1)C(1,0))/C(2,1) = 0.
        let bin2 = Binomials::new(4);
        let p2 = params(1, 2);
        assert!(kraw_sum(&bin2, p2, 1, 1).is_zero());
        assert_eq!(decay_exponent(&bin2, p2, 1, 1), f64::INFINITY);
    }

    #[test]
    fn dominant_audit_is_clean_on_a_small_grid() {
        let bin = Binomials::new(14);
        for m in [2u32, 3] {
            for n in 4..=14usize {
                let p = params(m, n);
                let rep = dominant_bound_check(&bin, p).unwrap();
                assert!(
                    rep.violations.is_empty(),
                    "m={m} N={n}: {:?}",
                    rep.violations
                );
                assert_eq!(rep.pairs_checked, (n + 1) * (n + 2) / 2);
                if let Some((eps, _)) = rep.peak_ratio_min {
                    assert!(eps > 0.0);
                }
            }
        }
    }
}

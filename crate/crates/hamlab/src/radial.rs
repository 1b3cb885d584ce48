//! Radial profiles and the O(N²) radial convolution calculus: sphere
//! averages, noise kernels, Cesàro means with complex order, and the
//! multiplier (Krawtchouk) diagonalization connecting them.
//!
//! A radial function is stored as its length-`(N+1)` profile of per-sphere
//! values. Convolution against a radial kernel is diagonal on the multiplier
//! side: transform, multiply eigenvalues, transform back.

use crate::combin::{big_pow, Binomials, LnFact, Rat};
use crate::error::{Error, Result};
use crate::group::{check_params, GroupParams};
use crate::krawtchouk::{kraw_float_parts, kraw_sum};
use crate::quad;
use crate::scalar::{rat_big, RealScalar, Scalar};
use num::{BigInt, One, Signed, Zero};

/// A radial function (or kernel) on `Z_{m+1}^N`: entry `r` is the value on
/// the sphere of radius `r`.
#[derive(Clone, Debug)]
pub struct RadialProfile<S: Scalar> {
    pub params: GroupParams,
    pub vals: Vec<S>,
    /// Set by constructors of kernels that are nonnegative by construction;
    /// verified at build time.
    pub nonneg: bool,
}

impl<S: Scalar> PartialEq for RadialProfile<S> {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.vals == other.vals
    }
}

impl<S: Scalar> RadialProfile<S> {
    pub fn from_vals(params: GroupParams, vals: Vec<S>) -> Self {
        assert_eq!(
            vals.len(),
            params.n() + 1,
            "radial profile needs N+1 entries"
        );
        Self {
            params,
            vals,
            nonneg: false,
        }
    }

    pub fn zeros(params: GroupParams) -> Self {
        Self {
            params,
            vals: vec![S::zero(); params.n() + 1],
            nonneg: true,
        }
    }

    fn declared_nonneg(mut self) -> Self {
        debug_assert!(
            self.vals.iter().all(|v| {
                let z = v.to_c64();
                z.im == 0.0 && z.re >= 0.0
            }),
            "kernel declared nonnegative carries a negative or complex value"
        );
        self.nonneg = true;
        self
    }

    /// Total L¹ mass `Σ_r vals[r]·|S_r|`.
    pub fn mass(&self, bin: &Binomials) -> S {
        let sizes = sphere_sizes_scalar::<S>(self.params, bin);
        let mut acc = S::zero();
        for (v, s) in self.vals.iter().zip(&sizes) {
            acc += v.clone() * s.clone();
        }
        acc
    }

    /// `L^p` norm over the group (counting measure):
    /// `(Σ_r |S_r|·|vals[r]|^p)^{1/p}`, computed in doubles.
    pub fn lp_norm(&self, bin: &Binomials, p: f64) -> f64 {
        assert!(p >= 1.0);
        let mut acc = 0.0f64;
        for (r, v) in self.vals.iter().enumerate() {
            let mag = v.to_c64().norm();
            if mag > 0.0 {
                acc += (crate::krawtchouk::ln_sphere(bin, self.params, r)
                    + p * mag.ln())
                .exp();
            }
        }
        acc.powf(1.0 / p)
    }

    /// Sup norm `max_r |vals[r]|` in doubles.
    pub fn sup_norm(&self) -> f64 {
        self.vals
            .iter()
            .map(|v| v.to_c64().norm())
            .fold(0.0, f64::max)
    }

    /// Pointwise combination with another profile.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        check_params(self.params, other.params)?;
        let vals = self
            .vals
            .iter()
            .zip(&other.vals)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Self {
            params: self.params,
            vals,
            nonneg: false,
        })
    }

    /// Scale every entry by a scalar.
    pub fn scaled(&self, c: &S) -> Self {
        Self {
            params: self.params,
            vals: self.vals.iter().map(|v| v.clone() * c.clone()).collect(),
            nonneg: false,
        }
    }

    /// Add `c · other` into `self`.
    pub fn axpy(&mut self, c: &S, other: &Self) {
        for (a, b) in self.vals.iter_mut().zip(&other.vals) {
            *a += c.clone() * b.clone();
        }
    }
}

/// Sphere sizes embedded into the scalar type.
pub fn sphere_sizes_scalar<S: Scalar>(params: GroupParams, bin: &Binomials) -> Vec<S> {
    params
        .sphere_sizes(bin)
        .iter()
        .map(|b| S::from_rational(&rat_big(b)))
        .collect()
}

/// L¹-normalized indicator of the radius-`r` sphere; the zero profile for
/// `r < 0`, an error for `r > N`.
pub fn sigma_profile<S: Scalar>(params: GroupParams, bin: &Binomials, r: i64) -> Result<RadialProfile<S>> {
    if r < 0 {
        return Ok(RadialProfile::zeros(params));
    }
    let size = params.sphere_size(bin, r)?;
    let mut prof = RadialProfile::zeros(params);
    prof.vals[r as usize] = S::from_rational(&Rat::new(BigInt::one(), size));
    Ok(prof.declared_nonneg())
}

/// Point mass at the origin (`σ_0`).
pub fn delta_profile<S: Scalar>(params: GroupParams) -> RadialProfile<S> {
    let mut prof = RadialProfile::zeros(params);
    prof.vals[0] = S::one();
    prof.declared_nonneg()
}

/// The uniform probability measure: every point carries `(m+1)^{−N}`.
pub fn uniform_profile<S: Scalar>(params: GroupParams) -> RadialProfile<S> {
    let total = big_pow(params.q(), params.n());
    let v = S::from_rational(&Rat::new(BigInt::one(), total));
    RadialProfile {
        params,
        vals: vec![v; params.n() + 1],
        nonneg: false,
    }
    .declared_nonneg()
}

/// L¹-normalized indicator of the ball `|x| ≤ ρ`.
pub fn ball_profile<S: Scalar>(
    params: GroupParams,
    bin: &Binomials,
    rho: usize,
) -> Result<RadialProfile<S>> {
    if rho > params.n() {
        return Err(Error::SphereRadiusOutOfRange {
            r: rho as i64,
            n: params.n(),
        });
    }
    let mass: BigInt = params.sphere_sizes(bin).into_iter().take(rho + 1).sum();
    let v = S::from_rational(&Rat::new(BigInt::one(), mass));
    let mut prof = RadialProfile::zeros(params);
    for r in 0..=rho {
        prof.vals[r] = v.clone();
    }
    Ok(prof.declared_nonneg())
}

/// The noise kernel with resampling probability `p ∈ [0, c_m]`:
/// density `(p/m)^r (1−p)^{N−r}` on the radius-`r` sphere.
pub fn noise_profile<S: Scalar>(params: GroupParams, p: &Rat) -> Result<RadialProfile<S>> {
    let c_m = params.c_m();
    if p.is_negative() || p > &c_m {
        return Err(Error::NoiseOutOfRange {
            p: RealScalar::to_f64(p),
            c_m: params.c_m_f64(),
        });
    }
    let n = params.n();
    let per_coord = p / Rat::from_integer(BigInt::from(params.m()));
    let keep = Rat::one() - p;
    let mut vals = Vec::with_capacity(n + 1);
    let mut cur = keep.pow(n as i32);
    for r in 0..=n {
        vals.push(S::from_rational(&cur));
        if r < n && !keep.is_zero() {
            cur = cur * &per_coord / &keep;
        } else if r < n {
            // p = c_m with m ≥ 1 keeps 1−p > 0 unless m = 0 (excluded), so
            // this branch only serves p = 1 groups that cannot occur; guard
            // anyway by direct recomputation.
            cur = per_coord.pow((r + 1) as i32) * keep.pow((n - r - 1) as i32);
        }
    }
    Ok(RadialProfile {
        params,
        vals,
        nonneg: false,
    }
    .declared_nonneg())
}

/// The noise parameter of the continuous-time semigroup at time `t`:
/// `p(t) = c_m (1 − e^{−t})`.
pub fn noise_p_of_t(params: GroupParams, t: f64) -> f64 {
    params.c_m_f64() * (1.0 - (-t).exp())
}

/// Fourier eigenvalues of a radial kernel, indexed by frequency weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier<S: Scalar> {
    pub params: GroupParams,
    pub eig: Vec<S>,
}

/// The Krawtchouk matrix `[s][r] = κ_s^N(r)` in the scalar `S`: exact values
/// embedded for exact scalars, the cancellation-safe float evaluation
/// otherwise.
pub fn kraw_matrix<S: Scalar>(params: GroupParams, bin: &Binomials, lf: &LnFact) -> Vec<Vec<S>> {
    let n = params.n();
    if S::EXACT {
        (0..=n)
            .map(|s| {
                (0..=n)
                    .map(|r| S::from_rational(&kraw_sum(bin, params, r as i64, s as i64)))
                    .collect()
            })
            .collect()
    } else {
        (0..=n)
            .map(|s| {
                (0..=n)
                    .map(|r| S::from_f64(kraw_float_parts(lf, params.m(), n, r, s).value))
                    .collect()
            })
            .collect()
    }
}

/// Forward radial transform: `eig[s] = Σ_r vals[r]·|S_r|·κ_s(r)`.
///
/// For a probability kernel this is its multiplier; `eig[0]` is the L¹
/// mass.
pub fn kernel_multiplier<S: Scalar>(
    kernel: &RadialProfile<S>,
    bin: &Binomials,
    kmat: &[Vec<S>],
) -> Multiplier<S> {
    let params = kernel.params;
    let n = params.n();
    let sizes = sphere_sizes_scalar::<S>(params, bin);
    let weighted: Vec<S> = kernel
        .vals
        .iter()
        .zip(&sizes)
        .map(|(v, s)| v.clone() * s.clone())
        .collect();
    let eig = (0..=n)
        .map(|s| {
            let mut acc = S::zero();
            for r in 0..=n {
                acc += weighted[r].clone() * kmat[s][r].clone();
            }
            acc
        })
        .collect();
    Multiplier { params, eig }
}

/// Inverse radial transform:
/// `vals[u] = (m+1)^{−N} Σ_s eig[s]·|S_s|·κ_u(s)`.
pub fn multiplier_to_profile<S: Scalar>(
    mult: &Multiplier<S>,
    bin: &Binomials,
    kmat: &[Vec<S>],
) -> RadialProfile<S> {
    let params = mult.params;
    let n = params.n();
    let sizes = sphere_sizes_scalar::<S>(params, bin);
    let scale = S::from_rational(&Rat::new(BigInt::one(), big_pow(params.q(), n)));
    let weighted: Vec<S> = mult
        .eig
        .iter()
        .zip(&sizes)
        .map(|(v, s)| v.clone() * s.clone())
        .collect();
    let vals = (0..=n)
        .map(|u| {
            let mut acc = S::zero();
            for s in 0..=n {
                acc += weighted[s].clone() * kmat[u][s].clone();
            }
            acc * scale.clone()
        })
        .collect();
    RadialProfile {
        params,
        vals,
        nonneg: false,
    }
}

/// Convolve a radial function with a radial kernel by multiplier
/// diagonalization: transform both, multiply eigenvalues pointwise,
/// transform back. Exact for exact scalars; for floats this path is
/// reliable at oracle scale (the certificates use the all-positive
/// transition-matrix path beyond that).
pub fn apply_radial<S: Scalar>(
    kernel: &RadialProfile<S>,
    f: &RadialProfile<S>,
    bin: &Binomials,
    kmat: &[Vec<S>],
) -> Result<RadialProfile<S>> {
    check_params(kernel.params, f.params)?;
    let mk = kernel_multiplier(kernel, bin, kmat);
    let mf = kernel_multiplier(f, bin, kmat);
    let prod = Multiplier {
        params: kernel.params,
        eig: mk
            .eig
            .iter()
            .zip(&mf.eig)
            .map(|(a, b)| a.clone() * b.clone())
            .collect(),
    };
    Ok(multiplier_to_profile(&prod, bin, kmat))
}

/// Collision weights of a `k`-sphere average against the full sphere:
/// `b_k(d) = m^{−k} C(k,d) (m−1)^{k−d}` for `d = 0..=k`, the distribution of
/// the number of coordinate agreements among `k` independent uniform nonzero
/// digits.
pub fn b_weights(m: u32, k: usize) -> Vec<Rat> {
    assert!(m >= 1);
    let denom = big_pow(m as u64, k);
    let bin = Binomials::new(k);
    (0..=k)
        .map(|d| {
            let num = bin.c(k, d) * big_pow(m as u64 - 1, k - d);
            Rat::new(num, denom.clone())
        })
        .collect()
}

/// Binomial mass `B(N, p, l) = C(N,l) p^l (1−p)^{N−l}`.
pub fn binom_weight<S: Scalar>(n: usize, p: &S, l: usize) -> S {
    assert!(l <= n);
    let c = S::from_rational(&rat_big(&crate::combin::binom_big(n, l)));
    let mut acc = c;
    for _ in 0..l {
        acc *= p.clone();
    }
    let q = S::one() - p.clone();
    for _ in 0..(n - l) {
        acc *= q.clone();
    }
    acc
}

/// Exact `∫_0^P B(N, p, l) dp` by the incomplete-Beta recurrence, unrolled
/// to the binomial tail sum
/// `(1/(N+1)) Σ_{j=l+1}^{N+1} C(N+1, j) P^j (1−P)^{N+1−j}`.
pub fn binom_partial_integral_exact(n: usize, l: usize, p_cap: &Rat) -> Rat {
    assert!(l <= n);
    let bin = Binomials::new(n + 1);
    let q = Rat::one() - p_cap;
    let mut acc = Rat::zero();
    // Powers P^j (1−P)^{N+1−j} built incrementally from j = l+1.
    let mut pw = p_cap.pow((l + 1) as i32) * q.pow((n - l) as i32);
    for j in (l + 1)..=(n + 1) {
        acc += Rat::from_integer(bin.c(n + 1, j).clone()) * &pw;
        if j < n + 1 {
            if q.is_zero() {
                pw = p_cap.pow((j + 1) as i32) * q.pow((n - j) as i32);
            } else {
                pw = pw * p_cap / &q;
            }
        }
    }
    acc / Rat::from_integer(BigInt::from(n as i64 + 1))
}

/// `∫_0^P B(N, p, l) dp` by adaptive quadrature (absolute tolerance 1e-12),
/// for dimensions beyond the exact cap. The integrand is evaluated in log
/// space so large `N` cannot overflow.
pub fn binom_partial_integral_quad(n: usize, l: usize, p_cap: f64) -> Result<f64> {
    assert!(l <= n && (0.0..=1.0).contains(&p_cap));
    let lf = LnFact::new(n);
    let ln_c = lf.ln_binom(n, l);
    let f = move |p: f64| -> f64 {
        if p <= 0.0 {
            return if l == 0 { 1.0 } else { 0.0 };
        }
        if p >= 1.0 {
            return if l == n { 1.0 } else { 0.0 };
        }
        (ln_c + l as f64 * p.ln() + (n - l) as f64 * (1.0 - p).ln()).exp()
    };
    quad::integrate(f, 0.0, p_cap, 1e-12)
}

/// `∫_0^P B(N, p, l) dp` in the requested scalar: exact when `N` is within
/// the exact cap, quadrature otherwise.
pub fn binom_partial_integral<S: Scalar>(
    n: usize,
    l: usize,
    p_cap: &Rat,
    exact_cap: usize,
) -> Result<S> {
    if n <= exact_cap {
        Ok(S::from_rational(&binom_partial_integral_exact(n, l, p_cap)))
    } else {
        let v = binom_partial_integral_quad(n, l, RealScalar::to_f64(p_cap))?;
        Ok(S::from_f64(v))
    }
}

/// The averaging measure on the time axis that reproduces the
/// noise-parameter average: density `(c_m/P)·T·e^{−T}` on `(0, T_P)` plus an
/// atom of weight `((c_m/P) − 1)·T_P` at `T_P = −ln(1 − P/c_m)`.
#[derive(Clone, Debug)]
pub struct NuMeasure {
    pub params: GroupParams,
    pub p_cap: Rat,
    /// `c_m / P`, exact.
    pub density_scale: Rat,
    /// `e^{−T_P} = 1 − P/c_m`, exact (zero means `T_P = +∞`).
    pub exp_neg_t_cap: Rat,
    /// `T_P`; `None` when `P = c_m` (the density then integrates over all of
    /// `(0, ∞)` and the atom vanishes).
    pub t_cap: Option<f64>,
    pub atom_weight: f64,
}

impl NuMeasure {
    pub fn new(params: GroupParams, p_cap: &Rat) -> Result<Self> {
        let c_m = params.c_m();
        if !p_cap.is_positive() || p_cap > &c_m {
            return Err(Error::InvalidParameter(format!(
                "averaging cap P must lie in (0, c_m]; got {p_cap}"
            )));
        }
        let density_scale = &c_m / p_cap;
        let exp_neg_t_cap = Rat::one() - p_cap / &c_m;
        let (t_cap, atom_weight) = if exp_neg_t_cap.is_zero() {
            (None, 0.0)
        } else {
            let t = -RealScalar::to_f64(&exp_neg_t_cap).ln();
            let w = (RealScalar::to_f64(&density_scale) - 1.0) * t;
            (Some(t), w)
        };
        Ok(Self {
            params,
            p_cap: p_cap.clone(),
            density_scale,
            exp_neg_t_cap,
            t_cap,
            atom_weight,
        })
    }

    /// `∫ g dν`: quadrature against the density (after the substitution
    /// `u = e^{−T}`, which maps the possibly-infinite time interval to
    /// `(u_P, 1)`) plus the atom contribution.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F, abs_tol: f64) -> Result<f64> {
        let scale = RealScalar::to_f64(&self.density_scale);
        let u_lo = RealScalar::to_f64(&self.exp_neg_t_cap);
        let density_part = quad::integrate(
            |u| {
                if u <= 0.0 || u >= 1.0 {
                    return 0.0;
                }
                let t = -u.ln();
                g(t) * t
            },
            u_lo,
            1.0,
            abs_tol,
        )? * scale;
        let atom_part = match self.t_cap {
            Some(t) if self.atom_weight != 0.0 => self.atom_weight * g(t),
            _ => 0.0,
        };
        Ok(density_part + atom_part)
    }

    /// Total mass by quadrature (should be 1).
    pub fn mass_quadrature(&self, abs_tol: f64) -> Result<f64> {
        self.integrate(|_| 1.0, abs_tol)
    }

    /// Total mass in closed form:
    /// `(c_m/P)(1 − (1 + T_P) e^{−T_P}) + ((c_m/P) − 1) T_P`.
    pub fn mass_analytic(&self) -> f64 {
        let scale = RealScalar::to_f64(&self.density_scale);
        match self.t_cap {
            None => scale, // Γ(2) = 1 times c_m/P = 1 at P = c_m.
            Some(t) => {
                let e = RealScalar::to_f64(&self.exp_neg_t_cap);
                scale * (1.0 - (1.0 + t) * e) + self.atom_weight
            }
        }
    }
}

/// The averaging family a Cesàro mean runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `P^k f = f ∗ σ_k`, indices `k ≤ floor(c_m N)`.
    Local,
    /// `Q^k f = f ∗ σ_{N−k}`, indices `k ≤ floor(N/(m+1))`.
    Distant,
}

impl Family {
    pub fn cutoff(&self, params: GroupParams) -> usize {
        match self {
            Family::Local => params.local_cutoff(),
            Family::Distant => params.distant_cutoff(),
        }
    }

    /// Sphere radius the `k`-th member averages over.
    pub fn sphere_radius(&self, params: GroupParams, k: usize) -> usize {
        match self {
            Family::Local => k,
            Family::Distant => params.n() - k,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Family::Local => "local",
            Family::Distant => "distant",
        }
    }
}

/// Complex binomial coefficients `A_0^λ .. A_n^λ` with
/// `A_j^λ = Π_{i=1..j} (λ+i)/i`; exact whenever the scalar is.
pub fn cesaro_coeffs<S: Scalar>(lambda: &S, n: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::one());
    for j in 1..=n {
        let factor =
            (lambda.clone() + S::from_i64_ratio(j as i64, 1)) * S::from_i64_ratio(1, j as i64);
        let prev = out.last().unwrap().clone();
        out.push(prev * factor);
    }
    out
}

/// A Cesàro mean `Σ_{k≤n} A^λ_{n−k}·(family average)_k`.
#[derive(Clone, Debug)]
pub struct CesaroParams<S: Scalar> {
    pub lambda: S,
    pub n: usize,
    pub family: Family,
}

/// The Cesàro kernel as a radial profile (a finite combination of sphere
/// averages). Errors when `n` exceeds the family cutoff.
pub fn cesaro_kernel<S: Scalar>(
    params: GroupParams,
    bin: &Binomials,
    cp: &CesaroParams<S>,
) -> Result<RadialProfile<S>> {
    let cutoff = cp.family.cutoff(params);
    if cp.n > cutoff {
        return Err(Error::CutoffViolation {
            n: cp.n,
            cutoff,
            operator: match cp.family {
                Family::Local => "local Cesàro mean",
                Family::Distant => "distant Cesàro mean",
            },
        });
    }
    let coeffs = cesaro_coeffs(&cp.lambda, cp.n);
    let mut kernel = RadialProfile::zeros(params);
    for k in 0..=cp.n {
        let radius = cp.family.sphere_radius(params, k) as i64;
        let sigma = sigma_profile::<S>(params, bin, radius)?;
        kernel.axpy(&coeffs[cp.n - k], &sigma);
    }
    Ok(kernel)
}

/// Apply a Cesàro mean to a radial function via the multiplier transform.
pub fn cesaro_apply<S: Scalar>(
    cp: &CesaroParams<S>,
    f: &RadialProfile<S>,
    bin: &Binomials,
    kmat: &[Vec<S>],
) -> Result<RadialProfile<S>> {
    let kernel = cesaro_kernel(f.params, bin, cp)?;
    apply_radial(&kernel, f, bin, kmat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::Workspace;
    use crate::group::{DenseDomain, GroupFunction, Radialized};
    use crate::scalar::{rat, rat_int};

    fn params(m: u32, n: usize) -> GroupParams {
        GroupParams::new(m, n).unwrap()
    }

    #[test]
    fn sigma_profiles_match_sphere_sizes() {
        let ws = Workspace::new(8);
        let p = params(2, 3);
        let s2 = sigma_profile::<Rat>(p, &ws.bin, 2).unwrap();
        assert_eq!(s2.vals[2], rat(1, 12));
        assert_eq!(s2.vals[0], rat_int(0));
        assert!(s2.nonneg);
        assert_eq!(s2.mass(&ws.bin), rat_int(1));

        let zero = sigma_profile::<Rat>(p, &ws.bin, -1).unwrap();
        assert_eq!(zero.mass(&ws.bin), rat_int(0));
        assert!(sigma_profile::<Rat>(p, &ws.bin, 4).is_err());

        let d = delta_profile::<Rat>(p);
        assert_eq!(d.vals[0], rat_int(1));
        assert_eq!(d.mass(&ws.bin), rat_int(1));
    }

    #[test]
    fn noise_kernel_has_unit_mass_and_correct_edges() {
        let ws = Workspace::new(8);
        let p = params(2, 4);
        // p = 0 is the point mass.
        let n0 = noise_profile::<Rat>(p, &Rat::zero()).unwrap();
        assert_eq!(n0, delta_profile::<Rat>(p));
        // p = c_m is uniform.
        let nc = noise_profile::<Rat>(p, &p.c_m()).unwrap();
        assert_eq!(nc, uniform_profile::<Rat>(p));
        // Interior value has unit mass and the product-form density.
        let half = rat(1, 3);
        let nh = noise_profile::<Rat>(p, &half).unwrap();
        assert_eq!(nh.mass(&ws.bin), rat_int(1));
        for r in 0..=4usize {
            let expect = rat(1, 6).pow(r as i32) * rat(2, 3).pow(4 - r as i32);
            assert_eq!(nh.vals[r], expect);
        }
        // Out of range.
        assert!(matches!(
            noise_profile::<Rat>(p, &rat(9, 10)),
            Err(Error::NoiseOutOfRange { .. })
        ));
        assert!(noise_profile::<Rat>(p, &rat(-1, 10)).is_err());
    }

    #[test]
    fn multipliers_diagonalize_kernels() {
        let ws = Workspace::new(8);
        let p = params(2, 4);
        let kmat = kraw_matrix::<Rat>(p, &ws.bin, &ws.lf);

        // σ_k transforms to the k-th Krawtchouk column.
        for k in 0..=4i64 {
            let sig = sigma_profile::<Rat>(p, &ws.bin, k).unwrap();
            let mult = kernel_multiplier(&sig, &ws.bin, &kmat);
            for s in 0..=4usize {
                assert_eq!(mult.eig[s], kraw_sum(&ws.bin, p, k, s as i64));
            }
        }

        // The point mass is the identity: all-ones multiplier.
        let d = delta_profile::<Rat>(p);
        let md = kernel_multiplier(&d, &ws.bin, &kmat);
        assert!(md.eig.iter().all(|e| e == &rat_int(1)));

        // Noise kernel: (1 − p/c_m)^s, exactly.
        let pr = rat(1, 2);
        let noise = noise_profile::<Rat>(p, &pr).unwrap();
        let mn = kernel_multiplier(&noise, &ws.bin, &kmat);
        let base = Rat::one() - &pr / p.c_m();
        for s in 0..=4usize {
            assert_eq!(mn.eig[s], base.pow(s as i32), "weight {s}");
        }

        // eig[0] is the mass.
        assert_eq!(mn.eig[0], rat_int(1));

        // Round trip: profile -> multiplier -> profile.
        let f = RadialProfile::from_vals(p, (0..=4).map(|r| rat(r as i64 - 2, 3)).collect());
        let back = multiplier_to_profile(
            &kernel_multiplier(&f, &ws.bin, &kmat),
            &ws.bin,
            &kmat,
        );
        assert_eq!(back, f);
    }

    #[test]
    fn apply_radial_matches_dense_oracle_exactly() {
        let ws = Workspace::new(8);
        let p = params(2, 3);
        let dom = DenseDomain::new(p, 1000).unwrap();
        let kmat = kraw_matrix::<Rat>(p, &ws.bin, &ws.lf);
        let f = RadialProfile::from_vals(p, (0..=3).map(|r| rat(2 * r as i64 + 1, 7)).collect());
        for k in 0..=3i64 {
            let kern = sigma_profile::<Rat>(p, &ws.bin, k).unwrap();
            let fast = apply_radial(&kern, &f, &ws.bin, &kmat).unwrap();
            let dense = GroupFunction::from_radial(&f, &dom)
                .unwrap()
                .convolve(&GroupFunction::from_radial(&kern, &dom).unwrap(), &dom)
                .unwrap();
            match dense.radialize(&dom, 0.0) {
                Radialized::Radial(prof) => assert_eq!(prof, fast, "k = {k}"),
                Radialized::NotRadial { .. } => panic!("radial convolution must stay radial"),
            }
        }

        // Identity kernel.
        let d = delta_profile::<Rat>(p);
        assert_eq!(apply_radial(&d, &f, &ws.bin, &kmat).unwrap(), f);
    }

    #[test]
    fn full_sphere_convolution_expands_in_b_weights() {
        let ws = Workspace::new(10);
        for &(m, n) in &[(2u32, 4usize), (3, 5), (1, 5)] {
            let p = params(m, n);
            let kmat = kraw_matrix::<Rat>(p, &ws.bin, &ws.lf);
            let sig_n = sigma_profile::<Rat>(p, &ws.bin, n as i64).unwrap();
            for k in 0..=n {
                let sig_k = sigma_profile::<Rat>(p, &ws.bin, k as i64).unwrap();
                let conv = apply_radial(&sig_k, &sig_n, &ws.bin, &kmat).unwrap();
                let weights = b_weights(m, k);
                let mut expect = RadialProfile::zeros(p);
                for (d, w) in weights.iter().enumerate() {
                    let sig = sigma_profile::<Rat>(p, &ws.bin, (n - d) as i64).unwrap();
                    expect.axpy(&Rat::from(w.clone()), &sig);
                }
                assert_eq!(conv, expect, "m={m} N={n} k={k}");
            }
        }
    }

    #[test]
    fn b_weights_match_worked_values() {
        assert_eq!(b_weights(2, 1), vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(b_weights(2, 2), vec![rat(1, 4), rat(1, 2), rat(1, 4)]);
        // Hypercube: all mass collides.
        assert_eq!(b_weights(1, 3), vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)]);
        for k in 0..6usize {
            let total: Rat = b_weights(3, k).into_iter().sum();
            assert_eq!(total, rat_int(1));
        }
    }

    #[test]
    fn binomial_weights_and_partial_integrals() {
        assert_eq!(binom_weight::<Rat>(4, &rat(1, 2), 2), rat(3, 8));
        let p = rat(2, 7);
        let total: Rat = (0..=5).map(|l| binom_weight::<Rat>(5, &p, l)).sum();
        assert_eq!(total, rat_int(1));
        assert_eq!(
            binom_weight::<Rat>(6, &p, 0),
            (Rat::one() - &p).pow(6)
        );

        // Full integral is 1/(N+1) for every l.
        for l in 0..=7usize {
            assert_eq!(
                binom_partial_integral_exact(7, l, &Rat::one()),
                rat(1, 8),
                "l = {l}"
            );
        }

        // l = 0: ∫_0^P (1−p)^N dp = (1 − (1−P)^{N+1})/(N+1).
        let n = 9usize;
        let p_cap = rat(1, n as i64);
        let got = binom_partial_integral_exact(n, 0, &p_cap);
        let expect = (Rat::one() - (Rat::one() - &p_cap).pow((n + 1) as i32))
            / Rat::from_integer(BigInt::from(n as i64 + 1));
        assert_eq!(got, expect);
        // ... which is at least (1 − e^{−1})/(N+1).
        let floor = (1.0 - (-1.0f64).exp()) / (n as f64 + 1.0);
        assert!(RealScalar::to_f64(&got) >= floor);

        // Monotone in P.
        let lo = binom_partial_integral_exact(6, 2, &rat(1, 4));
        let hi = binom_partial_integral_exact(6, 2, &rat(1, 2));
        assert!(lo < hi);

        // Quadrature path agrees with the exact path.
        let exact = RealScalar::to_f64(&binom_partial_integral_exact(30, 7, &rat(3, 10)));
        let quadr = binom_partial_integral_quad(30, 7, 0.3).unwrap();
        assert!((exact - quadr).abs() < 1e-12, "{exact} vs {quadr}");
    }

    #[test]
    fn nu_measure_has_unit_mass() {
        for m in 2u32..=4 {
            let p = params(m, 6);
            let c_m = p.c_m();
            for p_cap in [&c_m / rat_int(4), &c_m / rat_int(2), c_m.clone()] {
                let nu = NuMeasure::new(p, &p_cap).unwrap();
                let q = nu.mass_quadrature(1e-12).unwrap();
                let a = nu.mass_analytic();
                assert!((q - 1.0).abs() < 1e-10, "m={m} P={p_cap}: mass {q}");
                assert!((a - 1.0).abs() < 1e-12, "m={m} P={p_cap}: mass {a}");
                assert!(nu.atom_weight >= 0.0);
            }
            // Atom weight is strictly positive below c_m, zero at c_m.
            let below = NuMeasure::new(p, &(&c_m / rat_int(2))).unwrap();
            assert!(below.atom_weight > 0.0);
            let at = NuMeasure::new(p, &c_m).unwrap();
            assert_eq!(at.atom_weight, 0.0);
            assert!(at.t_cap.is_none());
        }
        assert!(NuMeasure::new(params(2, 6), &Rat::zero()).is_err());
    }

    #[test]
    fn cesaro_coefficients_specialize_correctly() {
        // λ = 0: all ones.
        let a0 = cesaro_coeffs::<Rat>(&Rat::zero(), 6);
        assert!(a0.iter().all(|v| v == &rat_int(1)));
        // λ = −1: only the leading 1 survives.
        let am1 = cesaro_coeffs::<Rat>(&rat_int(-1), 5);
        assert_eq!(am1[0], rat_int(1));
        assert!(am1[1..].iter().all(|v| v.is_zero()));
        // λ = 1: A_j = j + 1.
        let a1 = cesaro_coeffs::<Rat>(&rat_int(1), 5);
        for (j, v) in a1.iter().enumerate() {
            assert_eq!(v, &rat_int(j as i64 + 1));
        }
        // λ = −2: (1, −1, 0, 0, …) — first differences.
        let am2 = cesaro_coeffs::<Rat>(&rat_int(-2), 5);
        assert_eq!(am2[0], rat_int(1));
        assert_eq!(am2[1], rat_int(-1));
        assert!(am2[2..].iter().all(|v| v.is_zero()));
        // Complex λ stays exact over Gaussian rationals.
        let lam = crate::CRat::new(rat(1, 2), rat(1, 3));
        let ac = cesaro_coeffs::<crate::CRat>(&lam, 3);
        assert_eq!(ac[1], lam.clone() + crate::CRat::new(rat_int(1), rat_int(0)));
    }

    #[test]
    fn cesaro_kernels_reduce_to_differences_and_partial_sums() {
        let ws = Workspace::new(12);
        let p = params(2, 12);
        let kmat = kraw_matrix::<Rat>(p, &ws.bin, &ws.lf);
        let f = RadialProfile::from_vals(
            p,
            (0..=12).map(|r| rat((r as i64 * 3) % 7 + 1, 4)).collect(),
        );

        // λ = −1 is the plain average P^n.
        let cp = CesaroParams {
            lambda: rat_int(-1),
            n: 5,
            family: Family::Local,
        };
        let got = cesaro_apply(&cp, &f, &ws.bin, &kmat).unwrap();
        let sig5 = sigma_profile::<Rat>(p, &ws.bin, 5).unwrap();
        assert_eq!(got, apply_radial(&sig5, &f, &ws.bin, &kmat).unwrap());

        // λ = −2 at n = k is the first difference P^k − P^{k−1}.
        let cp2 = CesaroParams {
            lambda: rat_int(-2),
            n: 6,
            family: Family::Local,
        };
        let got2 = cesaro_apply(&cp2, &f, &ws.bin, &kmat).unwrap();
        let s6 = sigma_profile::<Rat>(p, &ws.bin, 6).unwrap();
        let s5 = sigma_profile::<Rat>(p, &ws.bin, 5).unwrap();
        let expect2 = apply_radial(&s6, &f, &ws.bin, &kmat)
            .unwrap()
            .zip_with(&apply_radial(&s5, &f, &ws.bin, &kmat).unwrap(), |a, b| {
                a.clone() - b.clone()
            })
            .unwrap();
        assert_eq!(got2, expect2);

        // λ = 0 is the running sum of the averages.
        let cp0 = CesaroParams {
            lambda: Rat::zero(),
            n: 4,
            family: Family::Local,
        };
        let got0 = cesaro_apply(&cp0, &f, &ws.bin, &kmat).unwrap();
        let mut expect0 = RadialProfile::zeros(p);
        for k in 0..=4i64 {
            let sk = sigma_profile::<Rat>(p, &ws.bin, k).unwrap();
            expect0.axpy(&rat_int(1), &apply_radial(&sk, &f, &ws.bin, &kmat).unwrap());
        }
        assert_eq!(got0, expect0);

        // Cutoff violations are rejected for both families.
        let over = CesaroParams {
            lambda: Rat::zero(),
            n: p.local_cutoff() + 1,
            family: Family::Local,
        };
        assert!(matches!(
            cesaro_kernel(p, &ws.bin, &over),
            Err(Error::CutoffViolation { .. })
        ));
        let over_d = CesaroParams {
            lambda: Rat::zero(),
            n: p.distant_cutoff() + 1,
            family: Family::Distant,
        };
        assert!(cesaro_kernel(p, &ws.bin, &over_d).is_err());
    }

    #[test]
    fn higher_difference_kernel_identity() {
        // The Cesàro kernel at λ = −t−1, n = k equals the literal
        // alternating-difference combination Σ_{j≤t} (−1)^j C(t,j) σ_{k−j}
        // for t ≤ k, in both families.
        let ws = Workspace::new(12);
        let p = params(2, 12);
        for family in [Family::Local, Family::Distant] {
            let cutoff = family.cutoff(p);
            for t in 0..=3usize {
                for k in t..=cutoff {
                    let cp = CesaroParams {
                        lambda: rat_int(-(t as i64) - 1),
                        n: k,
                        family,
                    };
                    let kernel = cesaro_kernel(p, &ws.bin, &cp).unwrap();
                    let mut expect = RadialProfile::zeros(p);
                    for j in 0..=t {
                        let radius = family.sphere_radius(p, k - j) as i64;
                        let sig = sigma_profile::<Rat>(p, &ws.bin, radius).unwrap();
                        let c = Rat::from_integer(ws.bin.c(t, j).clone());
                        let signed = if j % 2 == 0 { c } else { -c };
                        expect.axpy(&signed, &sig);
                    }
                    assert_eq!(kernel, expect, "{} t={t} k={k}", family.label());
                }
            }
        }
    }

    #[test]
    fn semigroup_law_on_the_multiplier_side() {
        let p = params(3, 10);
        for (t, s) in [(0.3, 0.9), (1.5, 0.2), (2.0, 2.0)] {
            let pt = noise_p_of_t(p, t);
            let ps = noise_p_of_t(p, s);
            let pts = noise_p_of_t(p, t + s);
            let c = p.c_m_f64();
            for r in 0..=10usize {
                let lhs = (1.0 - pt / c).powi(r as i32) * (1.0 - ps / c).powi(r as i32);
                let rhs = (1.0 - pts / c).powi(r as i32);
                assert!((lhs - rhs).abs() < 1e-12, "t={t} s={s} r={r}");
            }
        }
    }

    #[test]
    fn averages_contract_lp_norms() {
        let ws = Workspace::new(12);
        let p = params(2, 12);
        let kmat = kraw_matrix::<f64>(p, &ws.bin, &ws.lf);
        let f = RadialProfile::from_vals(
            p,
            (0..=12)
                .map(|r| (r as f64 * 0.77).sin().abs() + 0.1)
                .collect(),
        );
        for k in 0..=12i64 {
            let kern = sigma_profile::<f64>(p, &ws.bin, k).unwrap();
            let out = apply_radial(&kern, &f, &ws.bin, &kmat).unwrap();
            for pe in [1.0, 2.0] {
                assert!(
                    out.lp_norm(&ws.bin, pe) <= f.lp_norm(&ws.bin, pe) * (1.0 + 1e-9),
                    "k={k} p={pe}"
                );
            }
            assert!(out.sup_norm() <= f.sup_norm() + 1e-9);
            // Positivity: nonnegative kernel, nonnegative input.
            assert!(out.vals.iter().all(|v| *v >= -1e-9));
        }
    }

    #[test]
    fn ball_and_uniform_profiles_normalize() {
        let ws = Workspace::new(6);
        let p = params(2, 4);
        let b2 = ball_profile::<Rat>(p, &ws.bin, 2).unwrap();
        assert_eq!(b2.mass(&ws.bin), rat_int(1));
        assert_eq!(b2.vals[3], rat_int(0));
        // Ball of radius N is the uniform measure.
        let bn = ball_profile::<Rat>(p, &ws.bin, 4).unwrap();
        assert_eq!(bn, uniform_profile::<Rat>(p));
        assert!(ball_profile::<Rat>(p, &ws.bin, 5).is_err());
    }
}

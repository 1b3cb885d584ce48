//! Group arithmetic on `Z_{m+1}^N`, sphere enumeration, and the
//! exponential-cost dense oracle (convolution and full Fourier transform)
//! that certifies every fast path.
//!
//! Elements are encoded as base-`(m+1)` little-endian integer indices: digit
//! `i` contributes `x(i)·(m+1)^i`. The encoding gives O(1) index arithmetic
//! and a bit-exact fixture format.

use crate::combin::{big_pow, Binomials, Rat};
use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::scalar::Scalar;
use crate::C64;
use num::{BigInt, One, Zero};
use rayon::prelude::*;

/// The group `Z_{m+1}^N` with the Hamming metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupParams {
    m: u32,
    n: usize,
}

impl GroupParams {
    /// `m >= 1` (alphabet size minus one), `N >= 1` (dimension).
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter(format!(
                "alphabet parameter m must be >= 1, got {m}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidParameter(format!(
                "dimension N must be >= 1, got {n}"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Alphabet size `q = m + 1`.
    pub fn q(&self) -> u64 {
        self.m as u64 + 1
    }

    /// The constant `c_m = m/(m+1)`, exactly.
    pub fn c_m(&self) -> Rat {
        Rat::new(BigInt::from(self.m), BigInt::from(self.q()))
    }

    pub fn c_m_f64(&self) -> f64 {
        self.m as f64 / self.q() as f64
    }

    /// `(m+1)^N` when it fits in a `u128`.
    pub fn size_checked(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..self.n {
            acc = acc.checked_mul(self.q() as u128)?;
        }
        Some(acc)
    }

    /// The group size, after checking it against a dense-path cap.
    pub fn size_capped(&self, cap: u64) -> Result<u64> {
        let size = self.size_checked().unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::OracleCapExceeded {
                size,
                cap: cap as u128,
            });
        }
        Ok(size as u64)
    }

    /// Largest index of the local averaging family: `floor(c_m N)`.
    pub fn local_cutoff(&self) -> usize {
        ((self.m as u128 * self.n as u128) / self.q() as u128) as usize
    }

    /// Largest index of the distant averaging family: `floor(N/(m+1))`.
    pub fn distant_cutoff(&self) -> usize {
        self.n / self.q() as usize
    }

    /// `|S_r| = C(N, r)·m^r`; zero for `r < 0` (empty spheres), error for
    /// `r > N`.
    pub fn sphere_size(&self, bin: &Binomials, r: i64) -> Result<BigInt> {
        if r < 0 {
            return Ok(BigInt::zero());
        }
        let r = r as usize;
        if r > self.n {
            return Err(Error::SphereRadiusOutOfRange {
                r: r as i64,
                n: self.n,
            });
        }
        Ok(bin.c(self.n, r) * big_pow(self.m as u64, r))
    }

    /// All sphere sizes `|S_0| .. |S_N|`.
    pub fn sphere_sizes(&self, bin: &Binomials) -> Vec<BigInt> {
        let mut pw = BigInt::one();
        (0..=self.n)
            .map(|r| {
                let v = bin.c(self.n, r) * &pw;
                pw *= BigInt::from(self.m);
                v
            })
            .collect()
    }

    /// Sphere sizes as `f64` (exact for the sizes reachable by the float
    /// paths, which stay far below 2^53 per sphere only for small N; beyond
    /// that these are correctly-rounded doubles).
    pub fn sphere_sizes_f64(&self, bin: &Binomials) -> Vec<f64> {
        self.sphere_sizes(bin)
            .iter()
            .map(|s| crate::combin::ln_big(s).exp())
            .collect()
    }
}

/// Number of nonzero digits of a point given as a digit vector.
pub fn hamming_weight(digits: &[u32]) -> usize {
    digits.iter().filter(|&&d| d != 0).count()
}

/// Dense enumeration of the whole group: per-index digits and weights.
///
/// Construction is cap-checked; everything downstream of a `DenseDomain` is
/// an exponential-cost oracle.
pub struct DenseDomain {
    pub params: GroupParams,
    pub size: u64,
    /// Flattened digit table: digits of index `x` occupy
    /// `[x*N .. x*N + N]`, little-endian.
    digits: Vec<u8>,
    weights: Vec<u8>,
    /// `q^i` for `i in 0..N`.
    place: Vec<u64>,
}

impl DenseDomain {
    pub fn new(params: GroupParams, cap: u64) -> Result<Self> {
        let size = params.size_capped(cap)?;
        if params.m > 250 {
            return Err(Error::InvalidParameter(format!(
                "dense enumeration supports m <= 250, got {}",
                params.m
            )));
        }
        let n = params.n;
        let q = params.q();
        let mut place = Vec::with_capacity(n);
        let mut p = 1u64;
        for _ in 0..n {
            place.push(p);
            p *= q;
        }
        let mut digits = vec![0u8; size as usize * n];
        let mut weights = vec![0u8; size as usize];
        for x in 0..size as usize {
            let mut rem = x as u64;
            let mut w = 0u8;
            for i in 0..n {
                let d = (rem % q) as u8;
                rem /= q;
                digits[x * n + i] = d;
                if d != 0 {
                    w += 1;
                }
            }
            weights[x] = w;
        }
        Ok(Self {
            params,
            size,
            digits,
            weights,
            place,
        })
    }

    pub fn weight(&self, x: u64) -> usize {
        self.weights[x as usize] as usize
    }

    pub fn digits(&self, x: u64) -> &[u8] {
        let n = self.params.n;
        &self.digits[x as usize * n..x as usize * n + n]
    }

    /// Digitwise difference `a - b` mod `q`.
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let q = self.params.q();
        let da = self.digits(a);
        let db = self.digits(b);
        let mut idx = 0u64;
        for i in 0..self.params.n {
            let d = (da[i] as u64 + q - db[i] as u64) % q;
            idx += d * self.place[i];
        }
        idx
    }

    /// Digitwise sum `a + b` mod `q`.
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let q = self.params.q();
        let da = self.digits(a);
        let db = self.digits(b);
        let mut idx = 0u64;
        for i in 0..self.params.n {
            let d = (da[i] as u64 + db[i] as u64) % q;
            idx += d * self.place[i];
        }
        idx
    }

    /// Digit dot product `x · s` mod `q` (pairing of a point with a
    /// character index).
    pub fn dot(&self, x: u64, s: u64) -> u64 {
        let q = self.params.q();
        let dx = self.digits(x);
        let ds = self.digits(s);
        let mut acc = 0u64;
        for i in 0..self.params.n {
            acc += dx[i] as u64 * ds[i] as u64;
        }
        acc % q
    }

    /// First and last index of each weight class: deterministic
    /// representative points, two per nonempty sphere (one when the sphere
    /// is a single point).
    pub fn sphere_reps(&self) -> Vec<(usize, Vec<u64>)> {
        let n = self.params.n;
        let mut first: Vec<Option<u64>> = vec![None; n + 1];
        let mut last: Vec<u64> = vec![0; n + 1];
        for x in 0..self.size {
            let w = self.weight(x);
            if first[w].is_none() {
                first[w] = Some(x);
            }
            last[w] = x;
        }
        (0..=n)
            .map(|w| {
                let f = first[w].expect("every weight class 0..=N is nonempty");
                let l = last[w];
                let reps = if f == l { vec![f] } else { vec![f, l] };
                (w, reps)
            })
            .collect()
    }
}

/// A function on the whole group, stored densely by element index.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction<S: Scalar> {
    pub params: GroupParams,
    pub values: Vec<S>,
}

impl<S: Scalar> GroupFunction<S> {
    pub fn from_values(params: GroupParams, values: Vec<S>) -> Result<Self> {
        let expect = params
            .size_checked()
            .ok_or_else(|| Error::InvalidParameter("group too large for dense storage".into()))?;
        if values.len() as u128 != expect {
            return Err(Error::InvalidParameter(format!(
                "dense table has {} entries, group has {expect}",
                values.len()
            )));
        }
        Ok(Self { params, values })
    }

    /// Indicator of the origin.
    pub fn delta0(dom: &DenseDomain) -> Self {
        let mut values = vec![S::zero(); dom.size as usize];
        values[0] = S::one();
        Self {
            params: dom.params,
            values,
        }
    }

    /// Lift a radial profile to the dense table (value at `x` = profile at
    /// `|x|`).
    pub fn from_radial(profile: &RadialProfile<S>, dom: &DenseDomain) -> Result<Self> {
        check_params(profile.params, dom.params)?;
        let values = (0..dom.size)
            .map(|x| profile.vals[dom.weight(x)].clone())
            .collect();
        Ok(Self {
            params: dom.params,
            values,
        })
    }

    /// Counting-measure convolution `(f ∗ g)(x) = Σ_y f(x−y) g(y)`.
    ///
    /// Parallel over the output index; the inner accumulation order over `y`
    /// is fixed, so exact-scalar results are bit-identical across thread
    /// counts.
    pub fn convolve(&self, g: &Self, dom: &DenseDomain) -> Result<Self> {
        check_params(self.params, g.params)?;
        check_params(self.params, dom.params)?;
        let size = dom.size;
        let values: Vec<S> = (0..size)
            .into_par_iter()
            .map(|x| {
                let mut acc = S::zero();
                for y in 0..size {
                    let d = dom.sub(x, y);
                    acc += self.values[d as usize].clone() * g.values[y as usize].clone();
                }
                acc
            })
            .collect();
        Ok(Self {
            params: self.params,
            values,
        })
    }

    /// L¹ mass `Σ_x f(x)`.
    pub fn mass(&self) -> S {
        let mut acc = S::zero();
        for v in &self.values {
            acc += v.clone();
        }
        acc
    }

    /// Full Fourier transform `f̂(S) = Σ_x f(x) ξ^{−x·S}` with
    /// `ξ = e^{2πi/(m+1)}`.
    ///
    /// In this normalization the transform of the L¹-normalized sphere
    /// indicator at frequency weight `s` is exactly the degree-`|x|`
    /// Krawtchouk value, the point mass at the origin has flat spectrum `1`,
    /// and a character has spectrum `(m+1)^N` at its own frequency.
    pub fn fourier(&self, dom: &DenseDomain) -> Result<GroupFunction<C64>> {
        check_params(self.params, dom.params)?;
        let vals_c: Vec<C64> = self.values.iter().map(|v| v.to_c64()).collect();
        let roots = roots_of_unity(dom.params.q());
        let q = dom.params.q();
        let values: Vec<C64> = (0..dom.size)
            .into_par_iter()
            .map(|s| {
                let mut acc = C64::new(0.0, 0.0);
                for x in 0..dom.size {
                    let e = dom.dot(x, s);
                    // ξ^{−e} = conjugate of ξ^{e}
                    acc += vals_c[x as usize] * roots[((q - e) % q) as usize];
                }
                acc
            })
            .collect();
        Ok(GroupFunction {
            params: self.params,
            values,
        })
    }
}

impl GroupFunction<C64> {
    /// Inverse transform `f(x) = (m+1)^{−N} Σ_S f̂(S) ξ^{x·S}`.
    pub fn fourier_inverse(&self, dom: &DenseDomain) -> Result<GroupFunction<C64>> {
        check_params(self.params, dom.params)?;
        let roots = roots_of_unity(dom.params.q());
        let scale = 1.0 / dom.size as f64;
        let values: Vec<C64> = (0..dom.size)
            .into_par_iter()
            .map(|x| {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..dom.size {
                    let e = dom.dot(x, s);
                    acc += self.values[s as usize] * roots[e as usize];
                }
                acc * scale
            })
            .collect();
        Ok(GroupFunction {
            params: self.params,
            values,
        })
    }
}

/// The character `x ↦ ξ^{x·S}` as a dense table.
pub fn character(dom: &DenseDomain, s: u64) -> GroupFunction<C64> {
    let roots = roots_of_unity(dom.params.q());
    let values = (0..dom.size)
        .map(|x| roots[dom.dot(x, s) as usize])
        .collect();
    GroupFunction {
        params: dom.params,
        values,
    }
}

fn roots_of_unity(q: u64) -> Vec<C64> {
    (0..q)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
            C64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Outcome of projecting a dense function onto radial profiles.
#[derive(Clone, Debug)]
pub enum Radialized<S: Scalar> {
    Radial(RadialProfile<S>),
    NotRadial {
        /// First radius whose sphere carries differing values.
        radius: usize,
        /// Largest deviation from the sphere's representative value, over
        /// all spheres (as a complex-double magnitude).
        max_deviation: f64,
    },
}

impl<S: Scalar> GroupFunction<S> {
    /// If `f` is constant on every sphere (exactly, for exact scalars;
    /// within `tol`, for floats), return its radial profile; otherwise
    /// report the first offending radius and the maximal deviation.
    pub fn radialize(&self, dom: &DenseDomain, tol: f64) -> Radialized<S> {
        let n = self.params.n;
        let mut reps: Vec<Option<S>> = vec![None; n + 1];
        let mut max_dev = 0.0f64;
        let mut bad_radius: Option<usize> = None;
        for x in 0..dom.size {
            let w = dom.weight(x);
            let v = &self.values[x as usize];
            match &reps[w] {
                None => reps[w] = Some(v.clone()),
                Some(rep) => {
                    let same = if S::EXACT {
                        rep == v
                    } else {
                        let dev = (v.to_c64() - rep.to_c64()).norm();
                        max_dev = max_dev.max(dev);
                        dev <= tol
                    };
                    if S::EXACT && rep != v {
                        max_dev = max_dev.max((v.to_c64() - rep.to_c64()).norm());
                    }
                    if !same && bad_radius.is_none() {
                        bad_radius = Some(w);
                    }
                }
            }
        }
        match bad_radius {
            Some(radius) => Radialized::NotRadial {
                radius,
                max_deviation: max_dev,
            },
            None => {
                let vals = reps
                    .into_iter()
                    .map(|r| r.expect("all spheres nonempty"))
                    .collect();
                Radialized::Radial(RadialProfile::from_vals(self.params, vals))
            }
        }
    }
}

/// Values of `(f ∗ σ_k)` at one representative point, for every `k`.
#[derive(Clone, Debug)]
pub struct RepConvs<S: Scalar> {
    /// `|x₀|` of the representative.
    pub radius: usize,
    /// Dense index of the representative.
    pub rep_index: u64,
    /// Entry `k` is `(f ∗ σ_k)(x₀)`.
    pub convs: Vec<S>,
}

/// Brute-force sphere-average table: for each deterministic representative
/// point `x₀` (two per sphere), compute `(f ∗ σ_k)(x₀)` for every `k` in a
/// single O(|G|·N) pass, by bucketing `f(x₀ − y)` over the weight of `y`.
///
/// This is the workhorse oracle for maximal-operator equivalence: every
/// registry operator's value at `x₀` is a function of this vector.
pub fn rep_conv_table<S: Scalar>(
    f: &GroupFunction<S>,
    dom: &DenseDomain,
    bin: &Binomials,
) -> Result<Vec<RepConvs<S>>> {
    check_params(f.params, dom.params)?;
    let n = dom.params.n;
    let inv_sphere: Vec<Rat> = dom
        .params
        .sphere_sizes(bin)
        .into_iter()
        .map(|s| Rat::new(BigInt::one(), s))
        .collect();
    let reps: Vec<(usize, u64)> = dom
        .sphere_reps()
        .into_iter()
        .flat_map(|(w, reps)| reps.into_iter().map(move |r| (w, r)))
        .collect();
    let out: Vec<RepConvs<S>> = reps
        .into_par_iter()
        .map(|(radius, rep_index)| {
            let mut acc: Vec<S> = vec![S::zero(); n + 1];
            for y in 0..dom.size {
                let w = dom.weight(y);
                let z = dom.sub(rep_index, y);
                acc[w] += f.values[z as usize].clone();
            }
            let convs = acc
                .into_iter()
                .enumerate()
                .map(|(k, a)| a * S::from_rational(&inv_sphere[k]))
                .collect();
            RepConvs {
                radius,
                rep_index,
                convs,
            }
        })
        .collect();
    Ok(out)
}

pub(crate) fn check_params(a: GroupParams, b: GroupParams) -> Result<()> {
    if a != b {
        return Err(Error::MismatchedParams {
            m_a: a.m,
            n_a: a.n,
            m_b: b.m,
            n_b: b.n,
        });
    }
    Ok(())
}

//! Scalar abstraction: one set of numeric kernels, instantiated both at
//! floating point (for scale) and at exact rationals (for certificates).
//!
//! [`Scalar`] is the ring the kernels compute in; [`RealScalar`] is the
//! ordered subring magnitudes live in. Complex scalars report magnitudes as
//! *squared* moduli ([`Scalar::mag_sq`]) so that exact types never need a
//! square root.

use num::bigint::ToBigInt;
use num::rational::Ratio;
use num::traits::ToPrimitive;
use num::{BigRational, Complex, One, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field scalar the radial kernels are generic over.
///
/// `EXACT` distinguishes the big-rational instantiations (arithmetic is
/// error-free, comparisons may be exact) from floating ones (comparisons
/// need tolerances).
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    /// The ordered real scalar magnitudes live in.
    type Real: RealScalar;

    /// Whether arithmetic in this scalar is exact (no rounding).
    const EXACT: bool;

    /// Embed an exact rational.
    fn from_rational(r: &BigRational) -> Self;

    /// Embed a finite double.
    fn from_f64(x: f64) -> Self;

    /// Squared modulus `|z|^2` (square of absolute value for real types).
    fn mag_sq(&self) -> Self::Real;

    /// Real part.
    fn re(&self) -> Self::Real;

    /// Multiply by a real scalar.
    fn scale(&self, s: &Self::Real) -> Self;

    /// Lossy view as a complex double, for reporting and diagnostics.
    fn to_c64(&self) -> Complex<f64>;

    /// Embed the rational `num/den`. Convenience for tables of small exact
    /// constants.
    fn from_i64_ratio(num: i64, den: i64) -> Self {
        let r = BigRational::new(num.into(), den.into());
        Self::from_rational(&r)
    }

    /// Embed a Gaussian rational `re + i·im`. Real scalars can only hold it
    /// when `im = 0`; they return `None` otherwise.
    fn from_complex_rational(re: &BigRational, im: &BigRational) -> Option<Self> {
        if im.is_zero() {
            Some(Self::from_rational(re))
        } else {
            None
        }
    }
}

/// Ordered real scalar: magnitudes, thresholds, maxima.
pub trait RealScalar: Scalar<Real = Self> + PartialOrd {
    /// Absolute value.
    fn abs_val(&self) -> Self;

    /// Lossy view as a double, for reporting and diagnostics.
    fn to_f64(&self) -> f64;

    /// The larger of `self` and `other` (first argument on ties).
    fn max_with(&self, other: &Self) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).expect("big rational converts to f64")
}

fn f64_to_rational(x: f64) -> BigRational {
    Ratio::from_float(x).expect("finite float embeds as a rational")
}

impl Scalar for f64 {
    type Real = f64;
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn mag_sq(&self) -> f64 {
        self * self
    }
    fn re(&self) -> f64 {
        *self
    }
    fn scale(&self, s: &f64) -> f64 {
        self * s
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
}

impl RealScalar for f64 {
    fn abs_val(&self) -> f64 {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    type Real = f32;
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn mag_sq(&self) -> f32 {
        self * self
    }
    fn re(&self) -> f32 {
        *self
    }
    fn scale(&self, s: &f32) -> f32 {
        self * s
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(*self as f64, 0.0)
    }
}

impl RealScalar for f32 {
    fn abs_val(&self) -> f32 {
        f32::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    type Real = BigRational;
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_f64(x: f64) -> Self {
        f64_to_rational(x)
    }
    fn mag_sq(&self) -> BigRational {
        self * self
    }
    fn re(&self) -> BigRational {
        self.clone()
    }
    fn scale(&self, s: &BigRational) -> BigRational {
        self * s
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(rational_to_f64(self), 0.0)
    }
}

impl RealScalar for BigRational {
    fn abs_val(&self) -> BigRational {
        num::Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for Complex<f64> {
    type Real = f64;
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(rational_to_f64(r), 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
    fn mag_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn scale(&self, s: &f64) -> Complex<f64> {
        self * s
    }
    fn to_c64(&self) -> Complex<f64> {
        *self
    }
    fn from_complex_rational(re: &BigRational, im: &BigRational) -> Option<Self> {
        Some(Complex::new(rational_to_f64(re), rational_to_f64(im)))
    }
}

impl Scalar for Complex<BigRational> {
    type Real = BigRational;
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(f64_to_rational(x), BigRational::zero())
    }
    fn mag_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
    fn re(&self) -> BigRational {
        self.re.clone()
    }
    fn scale(&self, s: &BigRational) -> Complex<BigRational> {
        Complex::new(&self.re * s, &self.im * s)
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn from_complex_rational(re: &BigRational, im: &BigRational) -> Option<Self> {
        Some(Complex::new(re.clone(), im.clone()))
    }
}

/// Exact rational from an integer.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Exact rational `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Exact rational from any big integer.
pub fn rat_big<T: ToBigInt>(n: &T) -> BigRational {
    BigRational::from_integer(n.to_bigint().expect("integer embeds"))
}

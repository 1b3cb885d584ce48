//! Numerical harmonic analysis on the groups `Z_{m+1}^N` under the Hamming
//! (`l^0`) metric.
//!
//! The library implements the radial operator calculus on these groups —
//! spherical averages, the noise semigroup, Cesàro means with complex order,
//! maximal operators, and square functions — diagonalized by Krawtchouk
//! multipliers so that every radial operator application costs `O(N^2)`
//! arithmetic instead of `O((m+1)^N)`.
//!
//! Everything quantitative ships with a certificate: exponential-cost
//! brute-force oracles ([`group`]), exact big-rational evaluation paths
//! ([`krawtchouk`], [`radial`]), and experiment drivers that sweep parameter
//! grids and pass/fail against configured thresholds ([`bounds`]).
//!
//! Scalar genericity: numeric kernels are generic over [`scalar::Scalar`],
//! instantiated at `f32`/`f64`/`Complex64` for scale work and at
//! `BigRational`/`Complex<BigRational>` where certificates demand exactness.
//! The crate root re-exports concrete aliases ([`Rat`], [`CRat`], [`C64`])
//! for the common instantiations.

pub mod bounds;
pub mod combin;
pub mod error;
pub mod group;
pub mod krawtchouk;
pub mod ops;
pub mod quad;
pub mod radial;
pub mod scalar;

pub use error::{Error, Result};
pub use group::GroupParams;

/// Exact rational scalar used by all exact evaluation paths.
pub type Rat = num::BigRational;
/// Exact complex-rational scalar (Gaussian rationals) used by exact
/// complex-order Cesàro paths.
pub type CRat = num::Complex<num::BigRational>;
/// Complex floating scalar used by the dense Fourier oracle and by
/// complex-order float paths.
pub type C64 = num::Complex<f64>;

/// Radial profile over `f64`, the workhorse of large-`N` float sweeps.
pub type RadialF64 = radial::RadialProfile<f64>;
/// Radial profile over exact rationals, the workhorse of certificates.
pub type RadialExact = radial::RadialProfile<Rat>;

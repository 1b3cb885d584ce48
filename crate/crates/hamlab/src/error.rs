//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when evaluating operators or certificates.
#[derive(Debug, Error)]
pub enum Error {
    /// A sphere radius outside `0..=N` was requested where that is not
    /// representable (constructors that cannot return the zero profile).
    #[error("sphere radius {r} out of range for N = {n}")]
    SphereRadiusOutOfRange { r: i64, n: usize },

    /// A dense (exponential-cost) oracle was asked to run on a group larger
    /// than its configured cap.
    #[error("group of size {size} exceeds the dense-oracle cap {cap}")]
    OracleCapExceeded { size: u128, cap: u128 },

    /// Two objects built over different `(m, N)` were combined.
    #[error("mismatched group parameters: ({m_a}, {n_a}) vs ({m_b}, {n_b})")]
    MismatchedParams {
        m_a: u32,
        n_a: usize,
        m_b: u32,
        n_b: usize,
    },

    /// A difference of order `t` was applied to the averaging family at an
    /// index `k < t`, where the closed-form identity does not hold.
    #[error("difference order t = {t} exceeds operator index k = {k}")]
    DiffOrderExceedsIndex { t: usize, k: usize },

    /// An analysis requiring `m >= 2` was invoked on the hypercube `m = 1`,
    /// where the governing quadratic degenerates.
    #[error("analysis undefined on the hypercube m = 1: {context}")]
    HypercubeDegenerate { context: &'static str },

    /// A noise parameter outside `[0, m/(m+1)]` was supplied.
    #[error("noise parameter {p} outside [0, {c_m}]")]
    NoiseOutOfRange { p: f64, c_m: f64 },

    /// A Cesàro or distant-Cesàro index beyond its admissible cutoff.
    #[error("index n = {n} exceeds the cutoff {cutoff} for {operator}")]
    CutoffViolation {
        n: usize,
        cutoff: usize,
        operator: &'static str,
    },

    /// An operator id string that does not parse.
    #[error("unknown operator id {id:?}")]
    UnknownOperator { id: String },

    /// A float evaluation whose a-priori error bound exceeds the tolerance
    /// needed by the caller.
    #[error("float evaluation lost precision: error bound {bound:e} exceeds tolerance {tol:e} ({context})")]
    LossOfPrecision {
        bound: f64,
        tol: f64,
        context: &'static str,
    },

    /// Adaptive quadrature failed to reach its tolerance at max depth.
    #[error("quadrature did not converge: residual {residual:e} over [{a}, {b}]")]
    QuadratureNonConvergence { residual: f64, a: f64, b: f64 },

    /// A parameter combination outside an operator's domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed row in a user-supplied input file.
    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: usize, reason: String },

    /// An I/O error wrapped with context.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Internal invariant violation (a bug, not a user error).
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

//! Polyharmonic capacities and higher-order Wiener tests for radial compacta.
//!
//! The toolkit is organized around the log-polar reduction of `(-Δ)^m` on
//! `R^n`, `2 ≤ n ≤ 2m+1`: after the substitution `t = log 1/|x|` and an
//! exponential conjugation, the operator acts diagonally on spherical-harmonic
//! modes, with each mode governed by an even polynomial symbol in the dual
//! variable. Everything downstream — fundamental solutions of the mode-zero
//! operator, weighted quadratic forms, condenser capacities of concentric
//! shells and spheres, and dyadic capacity series for boundary-regularity
//! tests — is built on that exact symbol calculus.
//!
//! Module map:
//! - [`dims`]: problem dimensions, the regularity order, the admissible
//!   spherical-harmonic degrees, and elements of the associated data space.
//! - [`symbol`]: exact rational symbols of the conjugated operator and the
//!   coefficient tables `c_{kp}`.
//! - [`fundsol`]: piecewise exponential-polynomial fundamental solutions and
//!   the composite weights built from them.
//! - [`capacity`]: per-mode 1D variational capacities of radial compacta via
//!   conforming Hermite elements.
//! - [`wiener`]: dyadic capacity series, classification verdicts, and the
//!   decay envelope.
//! - [`oracle`]: independent x-space evaluation of the weighted quadratic
//!   forms by symbolic application of the radial polyharmonic operator; used
//!   for cross-checks only, never by the main computation path.

pub mod capacity;
pub mod cli;
pub mod dims;
pub mod emit;
mod error;
pub(crate) mod exact;
pub mod fem;
pub mod fundsol;
pub mod oracle;
pub mod report;
pub mod symbol;
pub mod verify;
pub mod wiener;

pub use error::Error;

/// Exact rational scalar used throughout the symbol calculus.
pub type Rat = num_rational::BigRational;

pub(crate) fn rat(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

pub(crate) fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

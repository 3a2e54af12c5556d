//! Independent x-space evaluation of the mode quadratic forms, used only to
//! cross-check the symbol calculus and the capacity engine.
//!
//! For a test function `u = r^a q(t) Y_p` (t = log 1/|x|), one application of
//! the Laplacian restricted to the degree-p eigenspace acts as
//!
//! `Δ: (a, q) -> (a-2, q'' - (2a+n-2) q' + (a(a+n-2) - p(p+n-2)) q)`,
//!
//! so `(-Δ)^m u = (-1)^m r^{a-2m} q_m(t) Y_p` with `q_m` obtained by iterating
//! the recurrence. Against the weight `r^{2m-n-2a}` the pairing of `(-Δ)^m u`
//! with `u` collapses to `(-1)^m ∫ q_m q dt`, a polynomial integral that is
//! computed in exact rational arithmetic and compared with the symbol-side
//! value `Σ_k c_k ∫ (q^(k))² dt`. Closed-form sphere capacities of the
//! second-order case in three dimensions serve as an endpoint oracle for the
//! finite-element solver.

use crate::capacity::{Annulus, Kind};
use crate::dims::Dims;
use crate::exact::{p_add, p_deriv, p_integral_01, p_mul, p_scale, RPoly};
use crate::symbol::conjugated_symbol;
use crate::{rat, Rat};

/// Polynomial factor of `(-Δ)^m (r^a q(t) Y_p)`, which equals
/// `r^{a-2m}` times the returned polynomial (times `Y_p`).
pub fn apply_mode_operator(dims: &Dims, shift: &Rat, p: u32, q: &RPoly) -> RPoly {
    let n = rat(dims.n as i64);
    let eigen = rat(dims.beltrami_eigenvalue(p as i64));
    let mut a = shift.clone();
    let mut cur = q.clone();
    for _ in 0..dims.m {
        let d1 = p_deriv(&cur);
        let d2 = p_deriv(&d1);
        let c1 = -(rat(2) * &a + &n - rat(2));
        let c0 = &a * (&a + &n - rat(2)) - &eigen;
        cur = p_add(&p_add(&d2, &p_scale(&d1, &c1)), &p_scale(&cur, &c0));
        a -= rat(2);
    }
    if dims.m % 2 == 1 {
        p_scale(&cur, &rat(-1))
    } else {
        cur
    }
}

/// `∫ (-Δ)^m u · u · r^{2m-n-2a} dx` for `u = r^a q(t) Y_p` with q supported
/// in [0, 1] on the t-axis, reduced to an exact polynomial integral.
pub fn weighted_pairing(dims: &Dims, shift: &Rat, p: u32, q: &RPoly) -> Rat {
    p_integral_01(&p_mul(&apply_mode_operator(dims, shift, p, q), q))
}

/// The same pairing computed from the symbol side:
/// `Σ_k c_k ∫_0^1 (q^(k))² dt`.
pub fn mode_form_value(dims: &Dims, shift: &Rat, p: u32, q: &RPoly) -> Rat {
    let row = conjugated_symbol(dims, shift, p);
    let mut acc = rat(0);
    let mut d = q.clone();
    for c in &row.coeffs {
        acc += c * p_integral_01(&p_mul(&d, &d));
        d = p_deriv(&d);
    }
    acc
}

/// `(t(1-t))^{2m+1}`: vanishes to order 2m+1 at both endpoints, so its
/// extension by zero is smooth enough for all integrations by parts.
pub fn bump(m: u32) -> RPoly {
    let base = vec![rat(0), rat(1), rat(-1)];
    let mut out = vec![rat(1)];
    for _ in 0..(2 * m + 1) {
        out = p_mul(&out, &base);
    }
    out
}

/// Closed-form per-mode sphere capacity for m = 1, n = 3: the constrained
/// minimizer on each side of the sphere is an explicit exponential profile.
pub fn sphere_mode_capacity_m1_n3(
    kind: Kind,
    p: u32,
    rho: f64,
    ambient: &Annulus,
) -> f64 {
    let l1 = (ambient.r_out / rho).ln();
    let l2 = (rho / ambient.r_in).ln();
    let (omega_sq, amp_sq) = match kind {
        Kind::Phi => ((p * (p + 1)) as f64, 1.0),
        Kind::Dirichlet => ((p as f64 + 0.5).powi(2), rho),
    };
    if omega_sq == 0.0 {
        amp_sq * (1.0 / l1 + 1.0 / l2)
    } else {
        let w = omega_sq.sqrt();
        amp_sq * w * ((w * l1).tanh().recip() + (w * l2).tanh().recip())
    }
}

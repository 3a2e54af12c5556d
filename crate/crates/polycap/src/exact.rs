//! Shared exact-arithmetic helpers: dense rational polynomials and a
//! rational linear solver. Internal to the crate.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::{rat, Rat};

/// Dense polynomial over the rationals, coefficients low degree first.
pub(crate) type RPoly = Vec<Rat>;

pub(crate) fn p_trim(mut p: RPoly) -> RPoly {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

pub(crate) fn p_add(a: &RPoly, b: &RPoly) -> RPoly {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    p_trim(out)
}

pub(crate) fn p_scale(a: &RPoly, s: &Rat) -> RPoly {
    if s.is_zero() {
        return Vec::new();
    }
    a.iter().map(|c| c * s).collect()
}

pub(crate) fn p_mul(a: &RPoly, b: &RPoly) -> RPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    p_trim(out)
}

pub(crate) fn p_deriv(a: &RPoly) -> RPoly {
    if a.len() <= 1 {
        return Vec::new();
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat(i as i64))
        .collect()
}

pub(crate) fn p_deriv_n(a: &RPoly, n: usize) -> RPoly {
    let mut p = a.clone();
    for _ in 0..n {
        p = p_deriv(&p);
    }
    p
}

pub(crate) fn p_eval(a: &RPoly, x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub(crate) fn p_eval_f64(a: &RPoly, x: f64) -> f64 {
    let mut acc = 0.0;
    for c in a.iter().rev() {
        acc = acc * x + rat_to_f64(c);
    }
    acc
}

/// ∫_0^1 a(s) ds, exact.
pub(crate) fn p_integral_01(a: &RPoly) -> Rat {
    let mut acc = Rat::zero();
    for (i, c) in a.iter().enumerate() {
        acc += c / rat(i as i64 + 1);
    }
    acc
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range num/denom pairs; fall back to a quotient of floats.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY * r.numer().signum().to_f64().unwrap());
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Solves A x = b over the rationals by Gaussian elimination.
/// Returns None when A is singular.
pub(crate) fn solve_rational(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    a[r][c] = &a[r][c] - &f * &a[col][c];
                }
                b[r] = &b[r] - &f * &b[col];
            }
        }
    }
    Some(b)
}

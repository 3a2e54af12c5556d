//! Fundamental solutions of the conjugated mode-zero operator on the line,
//! and the composite weights built from them.
//!
//! The operator is `Q(∂_t)` with `Q` from [`crate::symbol::operator_poly`] at
//! the conjugation exponent λ: mode 0 for odd n, and for even n the mode of
//! parity `q = (m - n/2) mod 2`, the one whose characteristic polynomial has
//! the double root at zero. `h` solves `Q(∂_t) h = δ`, vanishes at `+∞`, and
//! is bounded (odd n) or grows at most linearly (even n) at `-∞`.
//!
//! Odd n: the 2m characteristic roots are distinct integers and the branch
//! coefficients follow from a residue formula. Even n: roots come in pairs
//! `±B_j(q)` with double roots possible, and the coefficients are found by an
//! exact-rational jump system: homogeneous ansatz on each half-line,
//! continuity of derivatives `0..2m-2` at zero, and unit normalized jump of
//! the `(2m-1)`-th derivative (`(-1)^m`, the reciprocal of the leading
//! coefficient of `Q`).

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dims::{Dims, Parity};
use crate::exact::{p_deriv, p_eval, rat_to_f64, solve_rational};
use crate::report::Report;
use crate::symbol::{operator_poly, phi_shift};
use crate::{rat, Error, Rat};

/// One exponential-polynomial term `coeff * t^degree * e^{rate t}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "crate::emit::rat_serde")]
    pub rate: Rat,
    pub degree: u8,
    #[serde(with = "crate::emit::rat_serde")]
    pub coeff: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootMult {
    #[serde(with = "crate::emit::rat_serde")]
    pub value: Rat,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundSol {
    pub dims: Dims,
    /// Spherical-harmonic degree whose operator h inverts (0 for odd n).
    pub q_mode: u32,
    /// Characteristic polynomial of the operator, coefficients of z^0..z^2m.
    #[serde(with = "crate::emit::rat_vec_serde")]
    pub operator: Vec<Rat>,
    pub plus_terms: Vec<Term>,
    pub minus_terms: Vec<Term>,
    /// Linear-growth coefficient at -∞ (even n only).
    #[serde(with = "crate::emit::rat_serde")]
    pub mu4: Rat,
    #[serde(with = "crate::emit::rat_serde")]
    pub mu5: Rat,
    pub roots: Vec<RootMult>,
}

/// Characteristic roots for odd n: `{-m+n/2-1/2+2j}` and `{m-n/2-1/2-2j}`,
/// j = 0..m-1; 2m distinct integers, exactly one of them zero.
pub fn roots_odd(dims: &Dims) -> Result<Vec<Rat>, Error> {
    if dims.n_parity != Parity::Odd {
        return Err(Error::validation("odd-n root formula requires odd n"));
    }
    let m = dims.m as i64;
    let n = dims.n as i64;
    let mut roots = Vec::with_capacity(2 * dims.m as usize);
    for j in 0..m {
        roots.push(rat(-m + (n - 1) / 2 + 2 * j));
        roots.push(rat(m - (n + 1) / 2 - 2 * j));
    }
    roots.sort();
    let distinct = roots.windows(2).all(|w| w[0] != w[1]);
    let zeros = roots.iter().filter(|r| r.is_zero()).count();
    debug_assert!(distinct && zeros == 1);
    Ok(roots)
}

fn rpow(r: &Rat, k: u32) -> Rat {
    let mut acc = rat(1);
    for _ in 0..k {
        acc *= r;
    }
    acc
}

/// k-th derivative of `t^degree e^{rate t}` evaluated at t = 0.
fn deriv_at0(rate: &Rat, degree: u8, k: u32) -> Rat {
    match degree {
        0 => rpow(rate, k),
        1 => {
            if k == 0 {
                Rat::zero()
            } else {
                rat(k as i64) * rpow(rate, k - 1)
            }
        }
        _ => unreachable!("terms have degree 0 or 1"),
    }
}

/// Solves the matching system for a root multiset: strictly negative roots
/// span the t>0 branch, the rest span the t<0 branch.
fn solve_jump_system(
    m: u32,
    roots: &BTreeMap<Rat, u32>,
) -> Result<(Vec<Term>, Vec<Term>), Error> {
    let size = 2 * m as usize;
    let total: u32 = roots.values().sum();
    debug_assert_eq!(total as usize, size);

    // (branch_is_plus, rate, degree)
    let mut basis = Vec::with_capacity(size);
    for (rate, &mult) in roots {
        debug_assert!(mult <= 2);
        let plus = rate.is_negative();
        for d in 0..mult {
            basis.push((plus, rate.clone(), d as u8));
        }
    }

    let mut a = vec![vec![Rat::zero(); size]; size];
    let mut b = vec![Rat::zero(); size];
    for (k, row) in a.iter_mut().enumerate() {
        for (col, (plus, rate, deg)) in basis.iter().enumerate() {
            let v = deriv_at0(rate, *deg, k as u32);
            row[col] = if *plus { v } else { -v };
        }
    }
    b[size - 1] = if m % 2 == 0 { rat(1) } else { rat(-1) };

    let x = solve_rational(a, b).ok_or_else(|| {
        Error::computation("singular jump system: root multiplicity bookkeeping bug")
    })?;

    let mut plus_terms = Vec::new();
    let mut minus_terms = Vec::new();
    for ((plus, rate, deg), coeff) in basis.into_iter().zip(x) {
        if coeff.is_zero() {
            continue;
        }
        let term = Term {
            rate,
            degree: deg,
            coeff,
        };
        if plus {
            plus_terms.push(term);
        } else {
            minus_terms.push(term);
        }
    }
    Ok((plus_terms, minus_terms))
}

pub fn fundsol(dims: &Dims) -> Result<FundSol, Error> {
    let shift = phi_shift(dims);
    match dims.n_parity {
        Parity::Odd => {
            let roots = roots_odd(dims)?;
            let mut plus_terms = Vec::new();
            let mut minus_terms = Vec::new();
            for (i, g) in roots.iter().enumerate() {
                let mut denom = rat(1);
                for (j, gj) in roots.iter().enumerate() {
                    if j != i {
                        denom *= gj - g;
                    }
                }
                let mut kappa = denom.recip();
                if dims.m % 2 == 0 {
                    kappa = -kappa;
                }
                if g.is_negative() {
                    plus_terms.push(Term {
                        rate: g.clone(),
                        degree: 0,
                        coeff: kappa,
                    });
                } else {
                    minus_terms.push(Term {
                        rate: g.clone(),
                        degree: 0,
                        coeff: -kappa,
                    });
                }
            }
            Ok(FundSol {
                dims: *dims,
                q_mode: 0,
                operator: operator_poly(dims, &shift, 0),
                plus_terms,
                minus_terms,
                mu4: Rat::zero(),
                mu5: Rat::zero(),
                roots: roots
                    .into_iter()
                    .map(|value| RootMult { value, mult: 1 })
                    .collect(),
            })
        }
        Parity::Even => {
            let q = (dims.m - dims.n / 2) % 2;
            let mut roots: BTreeMap<Rat, u32> = BTreeMap::new();
            for j in 0..dims.m {
                let b = crate::symbol::b_coefficient(dims, j, q);
                *roots.entry(-&b).or_insert(0) += 1;
                *roots.entry(b).or_insert(0) += 1;
            }
            // The two signs of a vanishing B_j land on the same key; every
            // multiplicity stays <= 2 because |B_j| repeats at most twice.
            let (plus_terms, mut minus_terms) = solve_jump_system(dims.m, &roots)?;
            let mut mu4 = Rat::zero();
            let mut mu5 = Rat::zero();
            minus_terms.retain(|t| {
                if t.rate.is_zero() {
                    if t.degree == 1 {
                        mu4 = t.coeff.clone();
                    } else {
                        mu5 = t.coeff.clone();
                    }
                    false
                } else {
                    true
                }
            });
            Ok(FundSol {
                dims: *dims,
                q_mode: q,
                operator: operator_poly(dims, &shift, q),
                plus_terms,
                minus_terms,
                mu4,
                mu5,
                roots: roots
                    .into_iter()
                    .map(|(value, mult)| RootMult { value, mult })
                    .collect(),
            })
        }
    }
}

impl FundSol {
    /// Terms of the t<0 branch including the linear part, if any.
    fn minus_terms_full(&self) -> Vec<Term> {
        let mut terms = self.minus_terms.clone();
        if !self.mu4.is_zero() {
            terms.push(Term {
                rate: Rat::zero(),
                degree: 1,
                coeff: self.mu4.clone(),
            });
        }
        if !self.mu5.is_zero() {
            terms.push(Term {
                rate: Rat::zero(),
                degree: 0,
                coeff: self.mu5.clone(),
            });
        }
        terms
    }

    fn branch(&self, t: f64) -> Vec<Term> {
        if t >= 0.0 {
            self.plus_terms.clone()
        } else {
            self.minus_terms_full()
        }
    }

    fn eval_terms(terms: &[Term], t: f64, deriv: u32) -> f64 {
        let mut acc = 0.0;
        for term in terms {
            let rate = rat_to_f64(&term.rate);
            let coeff = rat_to_f64(&term.coeff);
            let v = match term.degree {
                0 => rate.powi(deriv as i32),
                _ => {
                    rate.powi(deriv as i32) * t
                        + if deriv == 0 {
                            0.0
                        } else {
                            deriv as f64 * rate.powi(deriv as i32 - 1)
                        }
                }
            };
            acc += coeff * v * (rate * t).exp();
        }
        acc
    }

    /// Exact derivative value at 0 from the given side.
    fn deriv_at0_exact(terms: &[Term], k: u32) -> Rat {
        terms
            .iter()
            .map(|t| &t.coeff * deriv_at0(&t.rate, t.degree, k))
            .sum()
    }
}

pub fn eval_fundsol(h: &FundSol, t: f64, deriv: u32) -> Result<f64, Error> {
    let order = 2 * h.dims.m;
    if deriv > order {
        return Err(Error::validation(format!(
            "derivative order {deriv} exceeds 2m = {order}"
        )));
    }
    if deriv == order && t == 0.0 {
        return Err(Error::validation(
            "derivative of order 2m is discontinuous at t = 0",
        ));
    }
    Ok(FundSol::eval_terms(&h.branch(t), t, deriv))
}

/// Parameters of the composite weights. The constants are existential in the
/// underlying inequalities; they default to 1, with the ambient scale R
/// defaulting to 10 (so C_R = log 40).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightParams {
    pub c1: f64,
    pub c2: f64,
    pub c_prime: f64,
    pub c_double_prime: f64,
    pub r: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            c1: 1.0,
            c2: 1.0,
            c_prime: 1.0,
            c_double_prime: 1.0,
            r: 10.0,
        }
    }
}

impl WeightParams {
    pub fn c_r(&self) -> f64 {
        (4.0 * self.r).ln()
    }
}

/// Composite weight: odd n `e^t (C1 h(t-τ) + C2)`; even n
/// `h(t-τ) + μ4 (C_R+τ) + C' + C'' (C_R+t)` on `t, τ ≥ log(1/(2R))`.
pub fn g_weight(h: &FundSol, params: &WeightParams, t: f64, tau: f64) -> Result<f64, Error> {
    let hval = eval_fundsol(h, t - tau, 0)?;
    match h.dims.n_parity {
        Parity::Odd => Ok(t.exp() * (params.c1 * hval + params.c2)),
        Parity::Even => {
            let lower = (1.0 / (2.0 * params.r)).ln();
            if t < lower || tau < lower {
                return Err(Error::validation(format!(
                    "even-n weight needs t, tau >= log(1/(2R)) = {lower:.6}"
                )));
            }
            let cr = params.c_r();
            Ok(hval
                + rat_to_f64(&h.mu4) * (cr + tau)
                + params.c_prime
                + params.c_double_prime * (cr + t))
        }
    }
}

/// Certifies the closed form: symbolic ODE residual, exact continuity and
/// jump at zero, sign of the mode-difference operators applied to h on the
/// grid, and the growth class at ±∞.
pub fn verify_fundsol(h: &FundSol, grid: &[f64]) -> Report {
    let dims = &h.dims;
    let m = dims.m;
    let mut report = Report::new();
    let shift = phi_shift(dims);

    // (a) The homogeneous ODE holds term by term: every rate is a root of
    // the characteristic polynomial, with Q' vanishing too under a t factor.
    let qprime = p_deriv(&h.operator);
    let minus_full = h.minus_terms_full();
    let mut residual_ok = true;
    for term in h.plus_terms.iter().chain(minus_full.iter()) {
        if !p_eval(&h.operator, &term.rate).is_zero() {
            residual_ok = false;
        }
        if term.degree == 1 && !p_eval(&qprime, &term.rate).is_zero() {
            residual_ok = false;
        }
    }
    report.check(
        "homogeneous ODE residual",
        residual_ok,
        if residual_ok {
            "symbolically zero on both branches".to_string()
        } else {
            "a term rate is not a characteristic root".to_string()
        },
    );

    // (b) Exact continuity of derivatives 0..2m-2 and the normalized jump.
    let mut continuity_ok = true;
    let mut jump_detail = String::new();
    for k in 0..=(2 * m - 1) {
        let jump = FundSol::deriv_at0_exact(&h.plus_terms, k)
            - FundSol::deriv_at0_exact(&minus_full, k);
        let expect = if k == 2 * m - 1 {
            if m % 2 == 0 {
                rat(1)
            } else {
                rat(-1)
            }
        } else {
            Rat::zero()
        };
        if jump != expect {
            continuity_ok = false;
            jump_detail = format!("derivative {k}: jump {jump}, expected {expect}");
        }
    }
    report.check(
        "continuity and normalized jump at 0",
        continuity_ok,
        if continuity_ok {
            "exact rational identities".to_string()
        } else {
            jump_detail
        },
    );

    // (c) Nonnegativity of the mode-difference operators on the grid.
    let pts: Vec<f64> = grid.iter().copied().filter(|t| *t != 0.0).collect();
    let mut min_val = f64::INFINITY;
    let mut sign_ok = true;
    let tol = -1e-9;
    match dims.n_parity {
        Parity::Odd => {
            let q0 = operator_poly(dims, &shift, 0);
            for p in 0..=dims.lambda {
                let qp = operator_poly(dims, &shift, p);
                let diff: Vec<Rat> = qp
                    .iter()
                    .zip(q0.iter())
                    .map(|(a, b)| a - b)
                    .collect();
                for &t in &pts {
                    let v = apply_operator(h, &diff, t);
                    min_val = min_val.min(v);
                    if v < tol {
                        sign_ok = false;
                    }
                }
            }
        }
        Parity::Even => {
            for p in (h.q_mode..=dims.lambda).step_by(2) {
                let qp = operator_poly(dims, &shift, p);
                for &t in &pts {
                    let v = apply_operator(h, &qp, t);
                    min_val = min_val.min(v);
                    if v < tol {
                        sign_ok = false;
                    }
                }
            }
        }
    }
    report.check(
        "mode-operator positivity on grid",
        sign_ok,
        format!("min value {min_val:.3e} over {} points", pts.len()),
    );

    // (d) Growth classes.
    let plus_decays = h.plus_terms.iter().all(|t| t.rate.is_negative());
    let minus_ok = h.minus_terms.iter().all(|t| match dims.n_parity {
        Parity::Odd => !t.rate.is_negative(),
        Parity::Even => t.rate.is_positive(),
    });
    let class = match dims.n_parity {
        Parity::Odd => "bounded",
        Parity::Even => {
            if h.mu4.is_zero() {
                "bounded"
            } else {
                "at most linear"
            }
        }
    };
    report.check(
        "growth class at infinity",
        plus_decays && minus_ok,
        format!("vanishes at +inf; {class} at -inf"),
    );

    report
}

/// Applies a constant-coefficient operator (coefficients of ∂_t^k) to h at t.
fn apply_operator(h: &FundSol, op: &[Rat], t: f64) -> f64 {
    let terms = h.branch(t);
    op.iter()
        .enumerate()
        .map(|(k, c)| rat_to_f64(c) * FundSol::eval_terms(&terms, t, k as u32))
        .sum()
}

//! Exact symbols of the conjugated operator in log-polar coordinates.
//!
//! With `t = log 1/|x|` and the substitution `u = |x|^sigma (v ∘ t)`,
//! `(-Δ)^m` acts on the spherical-harmonic mode `p` as the constant-coefficient
//! operator `Q(∂_t)` whose characteristic polynomial is
//!
//! `Q(z) = (-1)^m ∏_{j=0}^{m-1} ((z + sigma - 2j)(z + sigma + n - 2 - 2j) - p(p+n-2))`.
//!
//! On the Fourier side the quadratic form of the mode reduces to the even
//! polynomial `Re Q(-iγ) = Σ_k c_k γ^{2k}`; the imaginary part carries only
//! odd powers of `γ` and integrates to zero against `|v̂|²`, so only the real
//! part is exported. Two conjugation exponents matter downstream: the
//! weighted-form exponent `λ` (tables of `c_{kp}`) and the Dirichlet-energy
//! exponent `m - n/2`; for even `n` the two coincide and every row factors as
//! `∏_j (γ² + B_j(p)²)`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dims::{index_set_z, Dims, Parity};
use crate::exact::{p_eval, p_mul, RPoly};
use crate::report::Report;
use crate::{rat, ratio, Rat};

/// Even polynomial `Σ_k coeffs[k] γ^{2k}` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenPoly {
    #[serde(with = "crate::emit::rat_vec_serde")]
    pub coeffs: Vec<Rat>,
}

impl EvenPoly {
    /// Value at a given γ², exact.
    pub fn eval_gamma_sq(&self, gamma_sq: &Rat) -> Rat {
        p_eval(&self.coeffs, gamma_sq)
    }

    pub fn eval_gamma_sq_f64(&self, gamma_sq: f64) -> f64 {
        crate::exact::p_eval_f64(&self.coeffs, gamma_sq)
    }

    /// Degree in γ² (the tables produced here always have degree m with
    /// leading coefficient 1).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Conjugation exponent of the weighted form: λ.
pub fn phi_shift(dims: &Dims) -> Rat {
    rat(dims.lambda as i64)
}

/// Conjugation exponent of the Dirichlet energy: m - n/2.
pub fn dirichlet_shift(dims: &Dims) -> Rat {
    ratio(2 * dims.m as i64 - dims.n as i64, 2)
}

/// Characteristic polynomial `Q(z)` of the conjugated mode operator,
/// coefficients of `z^0..z^{2m}`. The mode operator itself is `Q(∂_t)`.
pub fn operator_poly(dims: &Dims, shift: &Rat, p: u32) -> RPoly {
    let eigen = rat(dims.beltrami_eigenvalue(p as i64));
    let mut q: RPoly = vec![rat(1)];
    for j in 0..dims.m as i64 {
        let a = shift - rat(2 * j);
        let b = shift + rat(dims.n as i64 - 2 - 2 * j);
        // (z + a)(z + b) - eigen
        let quad = vec![&a * &b - &eigen, a + b, rat(1)];
        q = p_mul(&q, &quad);
    }
    if dims.m % 2 == 1 {
        for c in q.iter_mut() {
            *c = -c.clone();
        }
    }
    q
}

/// Real part of `Q(-iγ)` expanded in powers of γ².
pub fn conjugated_symbol(dims: &Dims, shift: &Rat, p: u32) -> EvenPoly {
    let q = operator_poly(dims, shift, p);
    let mut coeffs = Vec::with_capacity(dims.m as usize + 1);
    for k in 0..=dims.m as usize {
        let c = q.get(2 * k).cloned().unwrap_or_else(Rat::zero);
        coeffs.push(if k % 2 == 0 { c } else { -c });
    }
    debug_assert!(coeffs.last().unwrap().is_one());
    EvenPoly { coeffs }
}

/// Odd-power coefficients of `Im Q(-iγ)` (the d_k in `Σ_k d_k γ^{2k+1}`);
/// identically zero for even n at shift λ.
pub fn symbol_imag_part(dims: &Dims, shift: &Rat, p: u32) -> Vec<Rat> {
    let q = operator_poly(dims, shift, p);
    (0..dims.m as usize)
        .map(|k| {
            let c = q.get(2 * k + 1).cloned().unwrap_or_else(Rat::zero);
            if k % 2 == 0 {
                -c
            } else {
                c
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub dims: Dims,
    #[serde(with = "crate::emit::rat_serde")]
    pub shift: Rat,
    /// rows[p] = symbol of mode p, for p = 0..=p_max.
    pub rows: Vec<EvenPoly>,
}

impl CoeffTable {
    pub fn p_max(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    pub fn row(&self, p: u32) -> &EvenPoly {
        &self.rows[p as usize]
    }
}

fn table_at(dims: &Dims, shift: Rat, p_max: u32) -> CoeffTable {
    let rows = (0..=p_max)
        .map(|p| conjugated_symbol(dims, &shift, p))
        .collect();
    CoeffTable {
        dims: *dims,
        shift,
        rows,
    }
}

/// Coefficients `c_{kp}` of the weighted form (conjugation exponent λ).
pub fn coeff_table(dims: &Dims, p_max: u32) -> CoeffTable {
    table_at(dims, phi_shift(dims), p_max)
}

/// Mode polynomials of the Dirichlet energy (conjugation exponent m - n/2).
pub fn dirichlet_symbol_table(dims: &Dims, p_max: u32) -> CoeffTable {
    table_at(dims, dirichlet_shift(dims), p_max)
}

/// Signed root `B_j(q) = q + n/2 + m - 2j - 2` of the even-n factorization.
pub fn b_coefficient(dims: &Dims, j: u32, q: u32) -> Rat {
    ratio(
        2 * (q as i64 + dims.m as i64 - 2 * j as i64 - 2) + dims.n as i64,
        2,
    )
}

/// Closed form of the zero-order coefficient `c_{0p}` (constant factor 1).
pub fn closed_form_c0(dims: &Dims, p: u32) -> Rat {
    let n = dims.n as i64;
    let eigen = rat(dims.beltrami_eigenvalue(p as i64));
    match dims.n_parity {
        Parity::Odd => {
            // Product over integer s from -n/2+3/2 to m-n/2+1/2.
            let s0 = (3 - n) / 2;
            let s1 = dims.m as i64 + (1 - n) / 2;
            let mut acc = rat(1);
            for s in s0..=s1 {
                acc *= &eigen - rat(s * (s + n - 2));
            }
            acc
        }
        Parity::Even => {
            let mut acc = rat(1);
            for j in 0..dims.m {
                let b = b_coefficient(dims, j, p);
                acc *= &b * &b;
            }
            acc
        }
    }
}

/// Checks a coefficient table against the structural bounds: positivity of
/// the higher-order coefficients, the exact zero set of `c_{0p}`, and the
/// eigenvalue-power lower bound on `c_{0p}` off the zero set. Witness
/// constants are recorded in the report details.
pub fn verify_symbol_bounds(table: &CoeffTable) -> Report {
    let dims = &table.dims;
    let z = index_set_z(dims);
    let mut report = Report::new();

    let mut c0_witness: Option<Rat> = None;
    for row in &table.rows {
        for c in row.coeffs.iter().skip(1) {
            if c0_witness.as_ref().map_or(true, |w| c < w) {
                c0_witness = Some(c.clone());
            }
        }
    }
    let w = c0_witness.unwrap();
    report.check(
        "higher-order coefficients positive",
        w.is_positive(),
        format!("min c_kp over k >= 1 is {w}"),
    );

    let mut zero_mismatches = Vec::new();
    for (p, row) in table.rows.iter().enumerate() {
        let is_zero = row.coeffs[0].is_zero();
        if is_zero != z.contains(p as u32) {
            zero_mismatches.push(p);
        }
    }
    report.check(
        "zero set of c_0p equals index set Z",
        zero_mismatches.is_empty(),
        if zero_mismatches.is_empty() {
            format!("checked p <= {}", table.p_max())
        } else {
            format!("mismatch at p in {zero_mismatches:?}")
        },
    );

    // c_0p >= C * max{1, (p(p+n-2))^m} off Z, with the computed witness C.
    let mut growth_witness: Option<Rat> = None;
    let mut growth_fail = Vec::new();
    for (p, row) in table.rows.iter().enumerate() {
        if z.contains(p as u32) {
            continue;
        }
        let eigen = rat(dims.beltrami_eigenvalue(p as i64));
        let mut bound = rat(1);
        for _ in 0..dims.m {
            bound *= &eigen;
        }
        if bound < rat(1) {
            bound = rat(1);
        }
        if !row.coeffs[0].is_positive() {
            growth_fail.push(p);
            continue;
        }
        let ratio = &row.coeffs[0] / &bound;
        if growth_witness.as_ref().map_or(true, |w| &ratio < w) {
            growth_witness = Some(ratio);
        }
    }
    let detail = match &growth_witness {
        Some(c) => format!("witness constant {c}"),
        None => "no rows off Z".to_string(),
    };
    report.check(
        "c_0p dominates eigenvalue power off Z",
        growth_fail.is_empty() && growth_witness.map_or(true, |c| c.is_positive()),
        if growth_fail.is_empty() {
            detail
        } else {
            format!("nonpositive c_0p at p in {growth_fail:?}")
        },
    );

    // c_0p / closed_form_c0 constant in p where both are nonzero.
    let mut ratios = Vec::new();
    for (p, row) in table.rows.iter().enumerate() {
        let cf = closed_form_c0(dims, p as u32);
        if !cf.is_zero() && !row.coeffs[0].is_zero() {
            ratios.push(&row.coeffs[0] / cf);
        }
    }
    let constant = ratios.windows(2).all(|w| w[0] == w[1]);
    report.check(
        "c_0p matches closed form up to a constant",
        constant && ratios.first().map_or(true, |r| r.is_positive()),
        match ratios.first() {
            Some(r) => format!("ratio {r}"),
            None => "all rows in Z".to_string(),
        },
    );

    report
}

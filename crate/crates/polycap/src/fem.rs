//! One-dimensional C^{m-1}-conforming Hermite elements of degree 2m-1 and a
//! banded symmetric positive-definite solver.
//!
//! The reference element lives on [0,1] with 2m shape functions indexed by
//! (node, derivative order): N_{a,d} has d-th derivative 1 at node a and all
//! other nodal derivatives up to order m-1 zero. Gram matrices of the k-th
//! derivatives are computed once per m in exact rational arithmetic, both
//! unweighted and against the weight s (for affine-in-t weights).

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::exact::{
    p_deriv_n, p_integral_01, p_mul, rat_to_f64, solve_rational, RPoly,
};
use crate::{rat, Error, Rat};

pub struct Elements {
    pub m: u32,
    /// Shape functions, local dof order (node0 d=0..m-1, node1 d=0..m-1).
    pub basis: Vec<RPoly>,
    /// gram[k][i][j] = ∫_0^1 N_i^(k) N_j^(k) ds, k = 0..=m.
    pub gram: Vec<Vec<Vec<f64>>>,
    /// Same with the extra weight factor s.
    pub gram_s: Vec<Vec<Vec<f64>>>,
}

fn factorial_ratio(c: usize, i: usize) -> Rat {
    // c! / (c-i)!
    let mut acc = rat(1);
    for v in (c - i + 1)..=c {
        acc *= rat(v as i64);
    }
    acc
}

fn build_elements(m: u32) -> Elements {
    let m = m as usize;
    let ndof = 2 * m;
    // Condition matrix: rows (node a, derivative i), columns coefficient of s^c.
    let mut cond = vec![vec![Rat::zero(); ndof]; ndof];
    for a in 0..2 {
        for i in 0..m {
            let row = a * m + i;
            for c in i..ndof {
                cond[row][c] = if a == 0 {
                    if c == i {
                        factorial_ratio(c, i)
                    } else {
                        Rat::zero()
                    }
                } else {
                    factorial_ratio(c, i)
                };
            }
        }
    }
    let mut basis = Vec::with_capacity(ndof);
    for j in 0..ndof {
        let mut rhs = vec![Rat::zero(); ndof];
        rhs[j] = rat(1);
        let coeffs = solve_rational(cond.clone(), rhs)
            .expect("Hermite interpolation system is nonsingular");
        basis.push(coeffs);
    }

    let weight_s: RPoly = vec![Rat::zero(), rat(1)];
    let mut gram = Vec::with_capacity(m + 1);
    let mut gram_s = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let derivs: Vec<RPoly> = basis.iter().map(|b| p_deriv_n(b, k)).collect();
        let mut g = vec![vec![0.0; ndof]; ndof];
        let mut gs = vec![vec![0.0; ndof]; ndof];
        for i in 0..ndof {
            for j in 0..=i {
                let prod = p_mul(&derivs[i], &derivs[j]);
                let v = rat_to_f64(&p_integral_01(&prod));
                let vs = rat_to_f64(&p_integral_01(&p_mul(&prod, &weight_s)));
                g[i][j] = v;
                g[j][i] = v;
                gs[i][j] = vs;
                gs[j][i] = vs;
            }
        }
        gram.push(g);
        gram_s.push(gs);
    }

    Elements {
        m: m as u32,
        basis,
        gram,
        gram_s,
    }
}

pub fn elements(m: u32) -> Arc<Elements> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Arc<Elements>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(m)
        .or_insert_with(|| Arc::new(build_elements(m)))
        .clone()
}

/// Symmetric banded matrix, lower triangle; data[i][d] holds A[i][i-d].
pub struct Banded {
    pub n: usize,
    pub hbw: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn new(n: usize, hbw: usize) -> Banded {
        Banded {
            n,
            hbw,
            data: vec![0.0; n * (hbw + 1)],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.hbw {
            0.0
        } else {
            self.data[hi * (self.hbw + 1) + (hi - lo)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.hbw);
        self.data[hi * (self.hbw + 1) + (hi - lo)] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.hbw);
        self.data[hi * (self.hbw + 1) + (hi - lo)] = v;
    }

    /// In-place banded Cholesky followed by two triangular solves.
    pub fn cholesky_solve(mut self, mut rhs: Vec<f64>) -> Result<Vec<f64>, Error> {
        let (n, hbw) = (self.n, self.hbw);
        for i in 0..n {
            let lo = i.saturating_sub(hbw);
            for j in lo..=i {
                let mut sum = self.get(i, j);
                let start = lo.max(j.saturating_sub(hbw));
                for k in start..j {
                    sum -= self.get(i, k) * self.get(j, k);
                }
                if j < i {
                    self.set(i, j, sum / self.get(j, j));
                } else {
                    if sum <= 0.0 {
                        return Err(Error::computation(format!(
                            "banded Cholesky broke down at row {i} (pivot {sum:.3e})"
                        )));
                    }
                    self.set(i, i, sum.sqrt());
                }
            }
        }
        // Forward substitution L y = b.
        for i in 0..n {
            let lo = i.saturating_sub(hbw);
            let mut sum = rhs[i];
            for k in lo..i {
                sum -= self.get(i, k) * rhs[k];
            }
            rhs[i] = sum / self.get(i, i);
        }
        // Back substitution L^T x = y.
        for i in (0..n).rev() {
            let hi = (i + hbw).min(n - 1);
            let mut sum = rhs[i];
            for k in (i + 1)..=hi {
                sum -= self.get(k, i) * rhs[k];
            }
            rhs[i] = sum / self.get(i, i);
        }
        Ok(rhs)
    }
}

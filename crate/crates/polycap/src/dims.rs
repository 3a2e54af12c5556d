//! Problem dimensions, the regularity order, and the admissible
//! spherical-harmonic data space.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(v: u32) -> Parity {
        if v % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Validated problem dimensions for `(-Δ)^m` on `R^n`.
///
/// `lambda` is the order of the derivatives whose boundary continuity the
/// Wiener-type series decides: `m - n/2 + 1/2` for odd `n`, `m - n/2` for
/// even `n`. The admissible range `2 ≤ n ≤ 2m+1` makes it a nonnegative
/// integer in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: u32,
    pub n: u32,
    pub lambda: u32,
    pub n_parity: Parity,
    pub m_parity: Parity,
}

impl Dims {
    pub fn new(m: u32, n: u32) -> Result<Dims, Error> {
        if m < 1 {
            return Err(Error::validation("m must satisfy m >= 1"));
        }
        if n < 2 {
            return Err(Error::validation(format!(
                "n = {n} violates the lower bound n >= 2"
            )));
        }
        if n > 2 * m + 1 {
            return Err(Error::validation(format!(
                "n = {n} violates the upper bound n <= 2m+1 = {}",
                2 * m + 1
            )));
        }
        let lambda = match Parity::of(n) {
            Parity::Odd => m - (n - 1) / 2,
            Parity::Even => m - n / 2,
        };
        Ok(Dims {
            m,
            n,
            lambda,
            n_parity: Parity::of(n),
            m_parity: Parity::of(m),
        })
    }

    /// Eigenvalue `p(p+n-2)` of `-δ_ω` on degree-`p` spherical harmonics.
    pub fn beltrami_eigenvalue(&self, p: i64) -> i64 {
        p * (p + self.n as i64 - 2)
    }
}

/// Spherical-harmonic degrees with vanishing zero-order symbol coefficient.
///
/// These are the degrees admitted in the capacity's boundary data: for odd
/// `n` all of `0..=lambda`; for even `n` an arithmetic progression of step 2
/// whose placement depends on the parity of `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSetZ {
    pub members: Vec<u32>,
}

impl IndexSetZ {
    pub fn contains(&self, p: u32) -> bool {
        self.members.binary_search(&p).is_ok()
    }
}

pub fn index_set_z(dims: &Dims) -> IndexSetZ {
    let m = dims.m as i64;
    let n = dims.n as i64;
    let members: Vec<u32> = match (dims.n_parity, dims.m_parity) {
        (Parity::Odd, _) => (0..=dims.lambda).collect(),
        // Even n: p = -n/2 + 2j with j = 1..m/2 (m even), or starting from
        // -n/2 + 1 with the same step (m odd); keep the nonnegative ones.
        (Parity::Even, Parity::Even) => (1..=m / 2)
            .map(|j| -n / 2 + 2 * j)
            .filter(|&p| p >= 0)
            .map(|p| p as u32)
            .collect(),
        (Parity::Even, Parity::Odd) => {
            let mut v = Vec::new();
            let mut p = -n / 2 + 1;
            while p <= m - n / 2 {
                if p >= 0 {
                    v.push(p as u32);
                }
                p += 2;
            }
            v
        }
    };
    debug_assert!(!members.is_empty());
    IndexSetZ { members }
}

/// Dimension of the space of degree-`p` spherical harmonics on `S^{n-1}`.
pub fn harmonic_multiplicity(n: u32, p: u32) -> u64 {
    // binom(n+p-1, p) - binom(n+p-3, p-2), which covers n = 2 as well.
    let first = binomial(n as u64 + p as u64 - 1, p as u64);
    let second = if p >= 2 {
        binomial(n as u64 + p as u64 - 3, p as u64 - 2)
    } else {
        0
    };
    first - second
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// A linear combination of spherical harmonics with degrees restricted to
/// the admissible set, stored by `(degree, index within the eigenspace)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiElement {
    pub dims: Dims,
    pub coeffs: BTreeMap<(u32, u32), f64>,
    pub norm: f64,
}

pub fn pi_element(
    dims: &Dims,
    coeffs: impl IntoIterator<Item = ((u32, u32), f64)>,
) -> Result<PiElement, Error> {
    let z = index_set_z(dims);
    let mut map = BTreeMap::new();
    for ((p, l), b) in coeffs {
        if !z.contains(p) {
            return Err(Error::validation(format!(
                "degree p = {p} is not in the admissible set {:?}",
                z.members
            )));
        }
        let mult = harmonic_multiplicity(dims.n, p);
        if (l as u64) >= mult {
            return Err(Error::validation(format!(
                "index l = {l} out of range for degree {p} (multiplicity {mult})"
            )));
        }
        if b != 0.0 {
            map.insert((p, l), b);
        }
    }
    let norm = map.values().map(|b| b * b).sum::<f64>().sqrt();
    Ok(PiElement {
        dims: *dims,
        coeffs: map,
        norm,
    })
}

impl PiElement {
    /// Rescale to unit norm. The zero element cannot be normalized.
    pub fn normalize(&self) -> Result<PiElement, Error> {
        if self.norm == 0.0 {
            return Err(Error::validation("cannot normalize the zero element"));
        }
        let mut out = self.clone();
        for b in out.coeffs.values_mut() {
            *b /= self.norm;
        }
        out.norm = 1.0;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_values() {
        assert_eq!(Dims::new(1, 3).unwrap().lambda, 0);
        assert_eq!(Dims::new(2, 3).unwrap().lambda, 1);
        assert_eq!(Dims::new(2, 2).unwrap().lambda, 1);
        assert_eq!(Dims::new(3, 4).unwrap().lambda, 1);
    }

    #[test]
    fn rejects_out_of_range() {
        let err = Dims::new(1, 4).unwrap_err().to_string();
        assert!(err.contains("n <= 2m+1"), "{err}");
        assert!(Dims::new(1, 1).is_err());
    }

    #[test]
    fn index_sets() {
        let z = |m, n| index_set_z(&Dims::new(m, n).unwrap()).members;
        assert_eq!(z(1, 3), vec![0]);
        assert_eq!(z(2, 3), vec![0, 1]);
        assert_eq!(z(2, 2), vec![1]);
        assert_eq!(z(3, 2), vec![0, 2]);
        assert_eq!(z(4, 4), vec![0, 2]);
        assert_eq!(z(3, 4), vec![1]);
    }

    #[test]
    fn multiplicities() {
        for p in 0..=100u32 {
            assert_eq!(harmonic_multiplicity(3, p), 2 * p as u64 + 1);
        }
        assert_eq!(harmonic_multiplicity(2, 0), 1);
        assert_eq!(harmonic_multiplicity(2, 5), 2);
        assert_eq!(harmonic_multiplicity(4, 2), 9);
    }

    #[test]
    fn pi_norms() {
        let dims = Dims::new(2, 3).unwrap();
        let e = pi_element(&dims, [((0, 0), 1.0)]).unwrap();
        assert_eq!(e.norm, 1.0);
        let e = pi_element(&dims, [((0, 0), 3.0), ((1, 0), 4.0)]).unwrap();
        assert_eq!(e.norm, 5.0);
        assert!(pi_element(&dims, [((2, 0), 1.0)]).is_err());
        let zero = pi_element(&dims, []).unwrap();
        assert!(zero.normalize().is_err());
        let unit = e.normalize().unwrap();
        assert!((unit.norm - 1.0).abs() < 1e-15);
    }
}

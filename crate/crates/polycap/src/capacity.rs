//! Per-mode variational capacities of radial compacta in annuli.
//!
//! Everything happens on the logarithmic axis t = log 1/|x|, where an annulus
//! is an interval and a concentric shell is a subinterval. For a fixed
//! spherical-harmonic degree p the quadratic form is
//! `Σ_k c_k ∫ (v^(k))² dt` with the mode symbol coefficients of the chosen
//! kind, minimized over C^{m-1} functions that are clamped (value and m-1
//! derivatives zero) at the annulus ends and agree with the constraint
//! profile on the obstacle: `v = e^{σt}` with σ = m - n/2 for the Dirichlet
//! energy (unit amplitude in the original variable), σ = 0 for the weighted
//! form. Minimization uses conforming Hermite elements of degree 2m-1 on a
//! mesh anchored at the obstacle boundaries, a banded Cholesky solve, and one
//! Richardson step of order 2m.
//!
//! Meshes are built from radius ratios, so simultaneous scaling of obstacle
//! and ambient translates the problem exactly; the scale enters only through
//! the closed-form factor r_out^{n-2m}. For radial obstacles the form and the
//! constraints are diagonal in the modes, which makes Cap_P an exact weighted
//! sum of per-mode capacities and Cap an exact minimum over the degrees with
//! vanishing zero-order coefficient.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::{index_set_z, Dims, PiElement};
use crate::exact::rat_to_f64;
use crate::fem::{elements, Banded};
use crate::symbol::{conjugated_symbol, dirichlet_shift, phi_shift, EvenPoly};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_in: f64,
    pub r_out: f64,
}

impl Annulus {
    pub fn new(r_in: f64, r_out: f64) -> Result<Annulus, Error> {
        if !(r_in.is_finite() && r_out.is_finite() && 0.0 < r_in && r_in < r_out) {
            return Err(Error::validation(format!(
                "annulus needs 0 < r_in < r_out, got ({r_in}, {r_out})"
            )));
        }
        Ok(Annulus { r_in, r_out })
    }

    /// t-interval [log(1/r_out), log(1/r_in)].
    pub fn t_interval(&self) -> (f64, f64) {
        ((1.0 / self.r_out).ln(), (1.0 / self.r_in).ln())
    }

    pub fn scale(&self, s: f64) -> Annulus {
        Annulus {
            r_in: self.r_in * s,
            r_out: self.r_out * s,
        }
    }
}

/// Finite union of closed concentric shells [a, b]; a = b encodes a sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCompactum {
    pub shells: Vec<(f64, f64)>,
}

pub fn radial_compactum(mut shells: Vec<(f64, f64)>) -> Result<RadialCompactum, Error> {
    for &(a, b) in &shells {
        if !(a.is_finite() && b.is_finite() && 0.0 < a && a <= b) {
            return Err(Error::validation(format!(
                "shell needs 0 < a <= b, got [{a}, {b}]"
            )));
        }
    }
    shells.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for w in shells.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::validation(format!(
                "shells [{}, {}] and [{}, {}] are not disjoint",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(RadialCompactum { shells })
}

impl RadialCompactum {
    pub fn empty() -> RadialCompactum {
        RadialCompactum { shells: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }
}

pub fn scale_compactum(k: &RadialCompactum, s: f64) -> RadialCompactum {
    RadialCompactum {
        shells: k.shells.iter().map(|&(a, b)| (a * s, b * s)).collect(),
    }
}

/// Inversion r -> 1/r: each [a, b] maps to [1/b, 1/a].
pub fn kelvin_invert(k: &RadialCompactum) -> RadialCompactum {
    let mut shells: Vec<(f64, f64)> = k
        .shells
        .iter()
        .map(|&(a, b)| (1.0 / b, 1.0 / a))
        .collect();
    shells.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    RadialCompactum { shells }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Phi,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Target element length on the t-axis.
    pub target_h: f64,
    /// Refine once and extrapolate at order 2m.
    pub richardson: bool,
    /// Extra mesh anchors (radii), e.g. to share a mesh between obstacles.
    pub extra_anchor_radii: Vec<f64>,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            target_h: 0.05,
            richardson: true,
            extra_anchor_radii: Vec::new(),
        }
    }
}

impl Discretization {
    /// Element size balancing accuracy (order 2m) against the conditioning
    /// of high-order elements.
    pub fn for_order(m: u32) -> Discretization {
        let target_h = match m {
            1 => 0.02,
            2 => 0.05,
            3 => 0.1,
            4 => 0.15,
            _ => 0.25,
        };
        Discretization {
            target_h,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityResult {
    pub kind: Kind,
    pub per_mode: BTreeMap<u32, f64>,
    pub cap_p: f64,
    pub cap_inf: f64,
    pub argmin_p: u32,
    pub elements: usize,
    pub error_estimate: f64,
}

struct Mesh {
    /// Node offsets from the outer-boundary t value, ascending.
    nodes: Vec<f64>,
    /// For each element, the shell index it lies inside, if any.
    element_shell: Vec<Option<usize>>,
    /// (shell index, offset interval) in offset coordinates.
    shell_offsets: Vec<(f64, f64)>,
}

fn build_mesh(
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
    refine: u32,
) -> Result<Mesh, Error> {
    let total = (ambient.r_out / ambient.r_in).ln();
    let off = |r: f64| (ambient.r_out / r).ln();

    // Shells in offset coordinates (outer radius first).
    let shell_offsets: Vec<(f64, f64)> = k.shells.iter().map(|&(a, b)| (off(b), off(a))).collect();

    let mut anchors = vec![0.0, total];
    for &(x, y) in &shell_offsets {
        anchors.push(x);
        anchors.push(y);
    }
    for &r in &disc.extra_anchor_radii {
        let o = off(r);
        if o > 0.0 && o < total {
            anchors.push(o);
        }
    }
    anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    anchors.dedup();

    let mut nodes = Vec::new();
    let mut element_shell = Vec::new();
    nodes.push(anchors[0]);
    for gap in anchors.windows(2) {
        let len = gap[1] - gap[0];
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (gap[0] + gap[1]);
        let shell = shell_offsets
            .iter()
            .position(|&(x, y)| x <= mid && mid <= y);
        let ne = ((len / disc.target_h).ceil() as usize).max(1) << refine;
        for i in 1..=ne {
            nodes.push(gap[0] + len * i as f64 / ne as f64);
            element_shell.push(shell);
        }
        // Pin the anchor exactly.
        *nodes.last_mut().unwrap() = gap[1];
    }
    if nodes.len() < 2 {
        return Err(Error::computation("degenerate mesh"));
    }
    Ok(Mesh {
        nodes,
        element_shell,
        shell_offsets,
    })
}

/// Energy of the constrained minimizer on one mesh, in offset coordinates
/// with unit constraint amplitude.
fn solve_on_mesh(m: u32, coeffs: &[f64], sigma: f64, mesh: &Mesh) -> Result<(f64, usize), Error> {
    let md = m as usize;
    let el = elements(m);
    let nn = mesh.nodes.len();
    let ndof = nn * md;
    let hbw = 2 * md - 1;

    // Fixed dofs: clamped ends and the constraint profile on the obstacle.
    let mut fixed: Vec<Option<f64>> = vec![None; ndof];
    for d in 0..md {
        fixed[d] = Some(0.0);
        fixed[(nn - 1) * md + d] = Some(0.0);
    }
    let span = mesh.nodes[nn - 1] - mesh.nodes[0];
    let tol = 1e-9 * span.max(1.0);
    for (ni, &x) in mesh.nodes.iter().enumerate() {
        if mesh
            .shell_offsets
            .iter()
            .any(|&(a, b)| x >= a - tol && x <= b + tol)
        {
            let amp = (sigma * x).exp();
            for d in 0..md {
                fixed[ni * md + d] = Some(sigma.powi(d as i32) * amp);
            }
        }
    }

    let element_matrix = |h: f64| -> Vec<Vec<f64>> {
        let nd = 2 * md;
        let mut ke = vec![vec![0.0; nd]; nd];
        for (kk, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for i in 0..nd {
                let di = i % md;
                for j in 0..nd {
                    let dj = j % md;
                    let pw = (1 + di + dj) as i32 - 2 * kk as i32;
                    ke[i][j] += c * h.powi(pw) * el.gram[kk][i][j];
                }
            }
        }
        ke
    };

    let mut a = Banded::new(ndof, hbw);
    let mut assembled = 0usize;
    for (e, shell) in mesh.element_shell.iter().enumerate() {
        if shell.is_some() {
            continue;
        }
        assembled += 1;
        let h = mesh.nodes[e + 1] - mesh.nodes[e];
        let ke = element_matrix(h);
        for i in 0..2 * md {
            let gi = (e + i / md) * md + i % md;
            for j in 0..=i {
                let gj = (e + j / md) * md + j % md;
                a.add(gi, gj, ke[i][j]);
            }
        }
    }

    // Move fixed-dof couplings to the right-hand side, then pin them.
    let mut rhs = vec![0.0; ndof];
    for i in 0..ndof {
        if let Some(g) = fixed[i] {
            if g != 0.0 {
                let lo = i.saturating_sub(hbw);
                let hi = (i + hbw).min(ndof - 1);
                for j in lo..=hi {
                    if fixed[j].is_none() {
                        rhs[j] -= a.get(j, i) * g;
                    }
                }
            }
        }
    }
    for i in 0..ndof {
        if let Some(g) = fixed[i] {
            let lo = i.saturating_sub(hbw);
            let hi = (i + hbw).min(ndof - 1);
            for j in lo..=hi {
                if j != i {
                    a.set(i, j, 0.0);
                }
            }
            a.set(i, i, 1.0);
            rhs[i] = g;
        }
    }

    let x = a.cholesky_solve(rhs)?;

    // Quadratic form of the solution over the assembled elements.
    let mut energy = 0.0;
    for (e, shell) in mesh.element_shell.iter().enumerate() {
        if shell.is_some() {
            continue;
        }
        let h = mesh.nodes[e + 1] - mesh.nodes[e];
        let ke = element_matrix(h);
        let mut local = vec![0.0; 2 * md];
        for i in 0..2 * md {
            local[i] = x[(e + i / md) * md + i % md];
        }
        for i in 0..2 * md {
            for j in 0..2 * md {
                energy += local[i] * ke[i][j] * local[j];
            }
        }
    }

    // Fixed profile energy inside the shells, in closed form.
    let mut profile = 0.0;
    for (kk, &c) in coeffs.iter().enumerate() {
        profile += c * sigma.powi(2 * kk as i32);
    }
    for &(a0, b0) in &mesh.shell_offsets {
        if b0 > a0 {
            let integral = if sigma == 0.0 {
                b0 - a0
            } else {
                ((2.0 * sigma * b0).exp() - (2.0 * sigma * a0).exp()) / (2.0 * sigma)
            };
            energy += profile * integral;
        }
    }

    Ok((energy, assembled))
}

fn kind_data(dims: &Dims, kind: Kind, p: u32) -> (EvenPoly, f64) {
    match kind {
        Kind::Phi => (conjugated_symbol(dims, &phi_shift(dims), p), 0.0),
        Kind::Dirichlet => {
            let sigma = dims.m as f64 - dims.n as f64 / 2.0;
            (conjugated_symbol(dims, &dirichlet_shift(dims), p), sigma)
        }
    }
}

fn validate_obstacle(k: &RadialCompactum, ambient: &Annulus) -> Result<(), Error> {
    for &(a, b) in &k.shells {
        if a <= ambient.r_in || b >= ambient.r_out {
            return Err(Error::validation(format!(
                "shell [{a}, {b}] is not strictly inside the ambient annulus ({}, {})",
                ambient.r_in, ambient.r_out
            )));
        }
    }
    Ok(())
}

fn mode_capacity_meta(
    dims: &Dims,
    kind: Kind,
    p: u32,
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
) -> Result<(f64, usize, f64), Error> {
    validate_obstacle(k, ambient)?;
    if k.is_empty() {
        return Ok((0.0, 0, 0.0));
    }
    let (row, sigma) = kind_data(dims, kind, p);
    let coeffs: Vec<f64> = row.coeffs.iter().map(rat_to_f64).collect();

    // The scale enters only through the amplitude factor: the obstacle
    // constraint in absolute coordinates is e^{σ t} = r_out^{-σ} e^{σ off}.
    let amplitude_sq = match kind {
        Kind::Phi => 1.0,
        Kind::Dirichlet => ambient.r_out.powi(dims.n as i32 - 2 * dims.m as i32),
    };

    let mesh = build_mesh(k, ambient, disc, 0)?;
    let (e0, nel) = solve_on_mesh(dims.m, &coeffs, sigma, &mesh)?;
    if !disc.richardson {
        return Ok((amplitude_sq * e0, nel, f64::NAN));
    }
    let fine = build_mesh(k, ambient, disc, 1)?;
    let (e1, nel1) = solve_on_mesh(dims.m, &coeffs, sigma, &fine)?;
    let w = (1u64 << (2 * dims.m)) as f64;
    let extrapolated = e1 + (e1 - e0) / (w - 1.0);
    Ok((amplitude_sq * extrapolated, nel1, amplitude_sq * (e1 - e0).abs()))
}

/// Capacity of a single unit-amplitude mode.
pub fn mode_capacity(
    dims: &Dims,
    kind: Kind,
    p: u32,
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
) -> Result<f64, Error> {
    mode_capacity_meta(dims, kind, p, k, ambient, disc).map(|(v, _, _)| v)
}

fn result_from_modes(
    dims: &Dims,
    kind: Kind,
    modes: &[u32],
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
    weights: Option<&BTreeMap<u32, f64>>,
) -> Result<CapacityResult, Error> {
    let solved: Result<Vec<_>, Error> = modes
        .par_iter()
        .map(|&p| mode_capacity_meta(dims, kind, p, k, ambient, disc).map(|r| (p, r)))
        .collect();
    let solved = solved?;

    let mut per_mode = BTreeMap::new();
    let mut elements = 0;
    let mut error_estimate: f64 = 0.0;
    for (p, (v, nel, err)) in solved {
        per_mode.insert(p, v);
        elements = elements.max(nel);
        if err.is_finite() {
            error_estimate = error_estimate.max(err);
        }
    }

    let z = index_set_z(dims);
    let (argmin_p, cap_inf) = z
        .members
        .iter()
        .filter_map(|p| per_mode.get(p).map(|&v| (*p, v)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap_or((0, 0.0));

    let cap_p = match weights {
        Some(w) => w
            .iter()
            .map(|(p, bsq)| bsq * per_mode.get(p).copied().unwrap_or(0.0))
            .sum(),
        None => cap_inf,
    };

    Ok(CapacityResult {
        kind,
        per_mode,
        cap_p,
        cap_inf,
        argmin_p,
        elements,
        error_estimate,
    })
}

/// Capacity with boundary datum P: for radial obstacles the form decouples,
/// so the result is the b²-weighted sum of per-mode capacities.
pub fn cap_p(
    dims: &Dims,
    kind: Kind,
    k: &RadialCompactum,
    ambient: &Annulus,
    p_elem: &PiElement,
    disc: &Discretization,
) -> Result<CapacityResult, Error> {
    // Sum b² per degree; the index l only multiplies the count.
    let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(p, _l), &b) in &p_elem.coeffs {
        *weights.entry(p).or_insert(0.0) += b * b;
    }
    let mut modes: Vec<u32> = weights.keys().copied().collect();
    for &p in &index_set_z(dims).members {
        if !modes.contains(&p) {
            modes.push(p);
        }
    }
    result_from_modes(dims, kind, &modes, k, ambient, disc, Some(&weights))
}

/// Minimal capacity over unit-norm data: exact minimum over the degrees in Z
/// for radial obstacles.
pub fn cap_inf(
    dims: &Dims,
    kind: Kind,
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
) -> Result<CapacityResult, Error> {
    let modes = index_set_z(dims).members;
    result_from_modes(dims, kind, &modes, k, ambient, disc, None)
}

/// Convergence sweep: capacities over progressively widened ambients
/// (each side widened by 2^step).
pub fn cap_inf_sweep(
    dims: &Dims,
    kind: Kind,
    k: &RadialCompactum,
    ambient: &Annulus,
    disc: &Discretization,
    steps: u32,
) -> Result<Vec<(f64, CapacityResult)>, Error> {
    let mut out = Vec::new();
    for s in 0..=steps {
        let f = (1u64 << s) as f64;
        let wide = Annulus::new(ambient.r_in / f, ambient.r_out * f)?;
        out.push((f, cap_inf(dims, kind, k, &wide, disc)?));
    }
    Ok(out)
}

/// Piecewise-polynomial mode function on the t-axis; each piece holds
/// coefficients in the local variable t - t0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeFunction {
    pub p: u32,
    pub l: u32,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiKind {
    Plain,
    /// Weight C_R + t with C_R = log(4R).
    Log { r: f64 },
}

fn poly_deriv_f64(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| v * i as f64)
        .collect()
}

/// ∫_0^len q(s)² (w0 + w1 s) ds for a polynomial q.
fn weighted_square_integral(q: &[f64], len: f64, w0: f64, w1: f64) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let mut sq = vec![0.0; 2 * q.len() - 1];
    for (i, a) in q.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            sq[i + j] += a * b;
        }
    }
    let mut acc = 0.0;
    for (i, c) in sq.iter().enumerate() {
        let base = len.powi(i as i32 + 1) / (i as f64 + 1.0);
        let lifted = len.powi(i as i32 + 2) / (i as f64 + 2.0);
        acc += c * (w0 * base + w1 * lifted);
    }
    acc
}

/// The weighted quadratic form `Σ_{p,l} Σ_k c_kp ∫ (∂_t^k v)² [· (C_R+t)] dt`.
pub fn phi_form(
    dims: &Dims,
    kind: PhiKind,
    modes: &[ModeFunction],
    annulus: &Annulus,
) -> Result<f64, Error> {
    let (t_lo, t_hi) = annulus.t_interval();
    let tol = 1e-9 * (t_hi - t_lo).abs().max(1.0);
    let shift = phi_shift(dims);
    let mut total = 0.0;
    for mode in modes {
        let row = conjugated_symbol(dims, &shift, mode.p);
        let coeffs: Vec<f64> = row.coeffs.iter().map(rat_to_f64).collect();
        for piece in &mode.pieces {
            if piece.t0 < t_lo - tol || piece.t1 > t_hi + tol || piece.t1 < piece.t0 {
                return Err(Error::validation(format!(
                    "piece [{}, {}] outside the annulus t-interval [{t_lo}, {t_hi}]",
                    piece.t0, piece.t1
                )));
            }
            let (w0, w1) = match kind {
                PhiKind::Plain => (1.0, 0.0),
                PhiKind::Log { r } => {
                    let lower = (1.0 / (2.0 * r)).ln();
                    if piece.t0 < lower - tol {
                        return Err(Error::validation(format!(
                            "log-weighted form needs support in t >= {lower:.6}"
                        )));
                    }
                    ((4.0 * r).ln() + piece.t0, 1.0)
                }
            };
            let len = piece.t1 - piece.t0;
            let mut q = piece.coeffs.clone();
            for c in coeffs.iter() {
                if *c != 0.0 {
                    total += c * weighted_square_integral(&q, len, w0, w1);
                }
                q = poly_deriv_f64(&q);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::pi_element;

    fn dims(m: u32, n: u32) -> Dims {
        Dims::new(m, n).unwrap()
    }

    fn sphere(r: f64) -> RadialCompactum {
        radial_compactum(vec![(r, r)]).unwrap()
    }

    #[test]
    fn compactum_validation() {
        assert!(radial_compactum(vec![(1.0, 2.0), (1.5, 3.0)]).is_err());
        assert!(radial_compactum(vec![(0.0, 1.0)]).is_err());
        let k = radial_compactum(vec![(2.0, 3.0), (0.5, 1.0)]).unwrap();
        assert_eq!(k.shells, vec![(0.5, 1.0), (2.0, 3.0)]);
    }

    #[test]
    fn kelvin_and_scale() {
        let k = radial_compactum(vec![(0.125, 0.25)]).unwrap();
        assert_eq!(kelvin_invert(&k).shells, vec![(4.0, 8.0)]);
        assert_eq!(kelvin_invert(&sphere(0.25)).shells, vec![(4.0, 4.0)]);
        assert_eq!(
            scale_compactum(&radial_compactum(vec![(1.0, 2.0)]).unwrap(), 0.25).shells,
            vec![(0.25, 0.5)]
        );
    }

    #[test]
    fn empty_obstacle_is_zero() {
        let d = dims(2, 3);
        let amb = Annulus::new(0.1, 10.0).unwrap();
        let r = cap_inf(
            &d,
            Kind::Dirichlet,
            &RadialCompactum::empty(),
            &amb,
            &Discretization::default(),
        )
        .unwrap();
        assert_eq!(r.cap_inf, 0.0);
    }

    #[test]
    fn obstacle_outside_ambient_rejected() {
        let d = dims(1, 3);
        let amb = Annulus::new(0.5, 2.0).unwrap();
        let e = mode_capacity(
            &d,
            Kind::Phi,
            0,
            &sphere(3.0),
            &amb,
            &Discretization::default(),
        );
        assert!(e.is_err());
    }

    #[test]
    fn phi_sphere_closed_form() {
        // Piecewise-linear minimizer of ∫ v'^2 with v(t0) = 1 and clamped
        // ends: 1/log 8 + 1/log 2 for ambient (r/8, 2r).
        let d = dims(1, 3);
        let r = 0.5;
        let amb = Annulus::new(r / 8.0, 2.0 * r).unwrap();
        let cap = mode_capacity(&d, Kind::Phi, 0, &sphere(r), &amb, &Discretization::default())
            .unwrap();
        let expect = 1.0 / 8f64.ln() + 1.0 / 2f64.ln();
        assert!(
            (cap - expect).abs() < 1e-12 * expect,
            "{cap} vs {expect}"
        );
    }

    #[test]
    fn dirichlet_sphere_matches_ode_solution() {
        let d = dims(1, 3);
        let rho = 0.5f64;
        let amb = Annulus::new(rho / 16.0, rho * 16.0).unwrap();
        let cap = mode_capacity(
            &d,
            Kind::Dirichlet,
            0,
            &sphere(rho),
            &amb,
            &Discretization::default(),
        )
        .unwrap();
        let half = 16f64.ln();
        let expect = rho * (0.5 * half).tanh().recip();
        assert!(
            (cap - expect).abs() < 1e-8 * expect,
            "{cap} vs {expect}"
        );
    }

    #[test]
    fn quadratic_in_amplitude_and_decoupled() {
        let d = dims(2, 3);
        let amb = Annulus::new(0.05, 4.0).unwrap();
        let k = radial_compactum(vec![(0.4, 0.6)]).unwrap();
        let disc = Discretization::for_order(2);
        let single = pi_element(&d, [((0, 0), 1.0)]).unwrap();
        let r1 = cap_p(&d, Kind::Dirichlet, &k, &amb, &single, &disc).unwrap();
        assert!((r1.cap_p - r1.per_mode[&0]).abs() < 1e-12 * r1.cap_p);

        let tripled = pi_element(&d, [((0, 0), 3.0)]).unwrap();
        let r3 = cap_p(&d, Kind::Dirichlet, &k, &amb, &tripled, &disc).unwrap();
        assert!((r3.cap_p - 9.0 * r1.cap_p).abs() < 1e-10 * r3.cap_p);

        let b = 1.0 / 2f64.sqrt();
        let mixed = pi_element(&d, [((0, 0), b), ((1, 0), b)]).unwrap();
        let rm = cap_p(&d, Kind::Dirichlet, &k, &amb, &mixed, &disc).unwrap();
        let avg = 0.5 * (rm.per_mode[&0] + rm.per_mode[&1]);
        assert!((rm.cap_p - avg).abs() < 1e-10 * avg);
        assert!(rm.cap_inf <= rm.cap_p + 1e-12);
    }

    #[test]
    fn scaling_law_exact() {
        for (m, n) in [(1u32, 3u32), (2, 3), (2, 2), (3, 4)] {
            let d = dims(m, n);
            let k = radial_compactum(vec![(0.25, 0.5)]).unwrap();
            let amb = Annulus::new(1.0 / 16.0, 2.0).unwrap();
            let disc = Discretization::for_order(m);
            let base = mode_capacity(&d, Kind::Dirichlet, 0, &k, &amb, &disc).unwrap();
            let s = 0.125f64;
            let scaled = mode_capacity(
                &d,
                Kind::Dirichlet,
                0,
                &scale_compactum(&k, s),
                &amb.scale(s),
                &disc,
            )
            .unwrap();
            let law = s.powi(n as i32 - 2 * m as i32);
            assert!(
                (scaled - law * base).abs() <= 1e-12 * (law * base).abs(),
                "m={m} n={n}: {scaled} vs {}",
                law * base
            );
        }
    }

    #[test]
    fn phi_scale_invariance() {
        let d = dims(2, 2);
        let k = radial_compactum(vec![(0.25, 0.5)]).unwrap();
        let amb = Annulus::new(1.0 / 16.0, 2.0).unwrap();
        let disc = Discretization::for_order(2);
        let base = mode_capacity(&d, Kind::Phi, 1, &k, &amb, &disc).unwrap();
        let s = 0.25;
        let scaled = mode_capacity(&d, Kind::Phi, 1, &scale_compactum(&k, s), &amb.scale(s), &disc)
            .unwrap();
        assert!((scaled - base).abs() <= 1e-12 * base.abs());
    }

    #[test]
    fn monotone_in_obstacle_and_ambient() {
        let d = dims(2, 3);
        let k1 = radial_compactum(vec![(0.4, 0.5)]).unwrap();
        let k2 = radial_compactum(vec![(0.3, 0.55)]).unwrap();
        let amb = Annulus::new(0.05, 4.0).unwrap();
        let disc = Discretization {
            richardson: false,
            extra_anchor_radii: vec![0.3, 0.4, 0.5, 0.55],
            ..Discretization::for_order(2)
        };
        let c1 = mode_capacity(&d, Kind::Dirichlet, 0, &k1, &amb, &disc).unwrap();
        let c2 = mode_capacity(&d, Kind::Dirichlet, 0, &k2, &amb, &disc).unwrap();
        assert!(c1 <= c2 * (1.0 + 1e-12));

        let wide = Annulus::new(0.01, 16.0).unwrap();
        let disc_wide = Discretization {
            extra_anchor_radii: vec![0.05, 4.0],
            ..disc.clone()
        };
        let cw = mode_capacity(&d, Kind::Dirichlet, 0, &k1, &wide, &disc_wide).unwrap();
        assert!(cw <= c1 * (1.0 + 1e-12));
    }

    #[test]
    fn phi_form_hat_and_shift_invariance() {
        let d = dims(1, 3);
        let amb = Annulus::new(0.01, 1.0).unwrap();
        // Triangular hat of half-width 0.5 and height 1: ∫ v'^2 = 2/d.
        let hat = ModeFunction {
            p: 0,
            l: 0,
            pieces: vec![
                Piece {
                    t0: 1.0,
                    t1: 1.5,
                    coeffs: vec![0.0, 2.0],
                },
                Piece {
                    t0: 1.5,
                    t1: 2.0,
                    coeffs: vec![1.0, -2.0],
                },
            ],
        };
        let v = phi_form(&d, PhiKind::Plain, &[hat.clone()], &amb).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");

        // Adding a constant to a mode in Z leaves the form unchanged.
        let mut shifted = hat.clone();
        for piece in &mut shifted.pieces {
            piece.coeffs[0] += 7.0;
        }
        let vs = phi_form(&d, PhiKind::Plain, &[shifted], &amb).unwrap();
        assert!((vs - v).abs() < 1e-9, "{vs} vs {v}");

        assert_eq!(phi_form(&d, PhiKind::Plain, &[], &amb).unwrap(), 0.0);
    }

    #[test]
    fn phi_form_log_domain() {
        // R = 10 requires support in t >= log(1/20) ≈ -3.0.
        let d = dims(2, 2);
        let amb = Annulus::new(0.01, 100.0).unwrap();
        let mode = ModeFunction {
            p: 1,
            l: 0,
            pieces: vec![Piece {
                t0: -4.0,
                t1: -3.5,
                coeffs: vec![0.0, 1.0],
            }],
        };
        assert!(phi_form(&d, PhiKind::Log { r: 10.0 }, &[mode.clone()], &amb).is_err());
        let ok = ModeFunction {
            pieces: vec![Piece {
                t0: -2.0,
                t1: -1.0,
                coeffs: vec![0.0, 1.0],
            }],
            ..mode
        };
        assert!(phi_form(&d, PhiKind::Log { r: 10.0 }, &[ok], &amb).is_ok());
    }

    #[test]
    fn sweep_converges_from_above() {
        let d = dims(1, 3);
        let rho = 0.5;
        let amb = Annulus::new(rho / 4.0, rho * 4.0).unwrap();
        let sweep = cap_inf_sweep(
            &d,
            Kind::Dirichlet,
            &sphere(rho),
            &amb,
            &Discretization::default(),
            4,
        )
        .unwrap();
        let caps: Vec<f64> = sweep.iter().map(|(_, r)| r.cap_inf).collect();
        for w in caps.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        assert!(caps.last().unwrap() > &rho);
    }
}

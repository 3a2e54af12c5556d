//! Cross-cutting invariant suite for a fixed (m, n): symbol-table bounds,
//! fundamental-solution identities, and the structural capacity laws
//! (scaling, translation invariance of the weighted form, Kelvin
//! comparability, monotonicity). The CLI `verify` subcommand runs this suite
//! and exits nonzero on any failing check.

use crate::capacity::{
    cap_inf, kelvin_invert, mode_capacity, radial_compactum, scale_compactum, Annulus,
    Discretization, Kind, RadialCompactum,
};
use crate::dims::{index_set_z, Dims};
use crate::fundsol::{fundsol, verify_fundsol};
use crate::report::Report;
use crate::symbol::{coeff_table, dirichlet_symbol_table, verify_symbol_bounds};
use crate::Error;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn run_suite(dims: &Dims) -> Result<Report, Error> {
    let mut report = Report::new();

    report.merge(verify_symbol_bounds(&coeff_table(dims, 40)));

    // Dirichlet rows are strictly positive away from γ = 0 (for even n the
    // two conjugations coincide, so rows on Z legitimately vanish at 0).
    let dt = dirichlet_symbol_table(dims, 20);
    let z = index_set_z(dims);
    let mut bad = Vec::new();
    for (p, row) in dt.rows.iter().enumerate() {
        for g_sq in [0.25f64, 1.0, 100.0] {
            if row.eval_gamma_sq_f64(g_sq) <= 0.0 {
                bad.push((p, g_sq));
            }
        }
        if dims.n % 2 == 1 || !z.contains(p as u32) {
            if row.eval_gamma_sq_f64(0.0) <= 0.0 {
                bad.push((p, 0.0));
            }
        }
    }
    report.check(
        "dirichlet symbol rows positive at sample frequencies",
        bad.is_empty(),
        if bad.is_empty() {
            "p <= 20, gamma in {0, 1/2, 1, 10}".to_string()
        } else {
            format!("failures at {bad:?}")
        },
    );

    let h = fundsol(dims)?;
    let grid: Vec<f64> = (-50..=50).map(|k| k as f64 / 10.0).collect();
    report.merge(verify_fundsol(&h, &grid));

    let disc = Discretization::for_order(dims.m);
    let shell = radial_compactum(vec![(0.25, 0.5)])?;
    let ambient = Annulus::new(1.0 / 16.0, 2.0)?;

    // Exact scaling law of the Dirichlet capacity.
    let p0 = z.members[0];
    let base = mode_capacity(dims, Kind::Dirichlet, p0, &shell, &ambient, &disc)?;
    let s = 0.125f64;
    let scaled = mode_capacity(
        dims,
        Kind::Dirichlet,
        p0,
        &scale_compactum(&shell, s),
        &ambient.scale(s),
        &disc,
    )?;
    let law = s.powi(dims.n as i32 - 2 * dims.m as i32);
    let err = rel_err(scaled, law * base);
    report.check(
        "dirichlet capacity scales by s^(n-2m)",
        err <= 1e-12,
        format!("relative error {err:.3e} at s = {s}"),
    );

    // Scale invariance of the weighted-form capacity (pure t-translation).
    let phi_base = mode_capacity(dims, Kind::Phi, p0, &shell, &ambient, &disc)?;
    let phi_scaled = mode_capacity(
        dims,
        Kind::Phi,
        p0,
        &scale_compactum(&shell, s),
        &ambient.scale(s),
        &disc,
    )?;
    let err = rel_err(phi_scaled, phi_base);
    report.check(
        "weighted-form capacity invariant under scaling",
        err <= 1e-12,
        format!("relative error {err:.3e}"),
    );

    // Monotonicity in the obstacle and anti-monotonicity in the ambient,
    // on a shared mesh so the discrete inclusions are exact.
    let small = radial_compactum(vec![(0.3, 0.4)])?;
    let large = radial_compactum(vec![(0.25, 0.5)])?;
    let shared = Discretization {
        richardson: false,
        extra_anchor_radii: vec![0.25, 0.3, 0.4, 0.5, 1.0 / 16.0, 2.0],
        ..disc.clone()
    };
    let c_small = mode_capacity(dims, Kind::Dirichlet, p0, &small, &ambient, &shared)?;
    let c_large = mode_capacity(dims, Kind::Dirichlet, p0, &large, &ambient, &shared)?;
    let wide = Annulus::new(1.0 / 64.0, 8.0)?;
    let c_wide = mode_capacity(dims, Kind::Dirichlet, p0, &large, &wide, &shared)?;
    let mono_k = c_small <= c_large * (1.0 + 1e-10);
    let mono_amb = c_wide <= c_large * (1.0 + 1e-10);
    report.check(
        "capacity monotone in obstacle",
        mono_k,
        format!("{c_small:.6e} <= {c_large:.6e}"),
    );
    report.check(
        "capacity anti-monotone in ambient",
        mono_amb,
        format!("{c_wide:.6e} <= {c_large:.6e}"),
    );

    // Kelvin comparability: s^(4m-2n) Cap(K_s) / Cap(K_s inverted) is a
    // positive constant across dyadic scales (both sides scale exactly).
    let kelvin_ratio = |s: f64| -> Result<f64, Error> {
        let k = scale_compactum(&radial_compactum(vec![(1.0, 2.0)])?, s);
        let amb = Annulus::new(0.5 * s, 8.0 * s)?;
        let direct = cap_inf(dims, Kind::Dirichlet, &k, &amb, &disc)?.cap_inf;
        let ki = kelvin_invert(&k);
        let amb_i = Annulus::new(1.0 / (8.0 * s), 2.0 / s)?;
        let inverted = cap_inf(dims, Kind::Dirichlet, &ki, &amb_i, &disc)?.cap_inf;
        Ok(s.powi(4 * dims.m as i32 - 2 * dims.n as i32) * direct / inverted)
    };
    let r1 = kelvin_ratio(0.25)?;
    let r2 = kelvin_ratio(1.0 / 64.0)?;
    let stable = r1.is_finite() && r1 > 0.0 && rel_err(r1, r2) <= 1e-10;
    report.check(
        "kelvin ratio constant across scales",
        stable,
        format!("ratio {r1:.6} vs {r2:.6}"),
    );

    // Empty obstacle has zero capacity.
    let empty = cap_inf(
        dims,
        Kind::Dirichlet,
        &RadialCompactum::empty(),
        &ambient,
        &disc,
    )?;
    report.check(
        "empty obstacle has zero capacity",
        empty.cap_inf == 0.0,
        format!("{}", empty.cap_inf),
    );

    Ok(report)
}

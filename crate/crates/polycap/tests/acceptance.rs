//! End-to-end acceptance suite. Each test prints one pass/fail line for its
//! criterion and fails the build on any violation; tolerances are pinned
//! here.

use polycap::capacity::{
    cap_inf, kelvin_invert, mode_capacity, radial_compactum, scale_compactum, Annulus,
    Discretization, Kind, RadialCompactum,
};
use polycap::dims::{index_set_z, Dims};
use polycap::fundsol::{fundsol, verify_fundsol, Term};
use polycap::oracle;
use polycap::symbol::{coeff_table, dirichlet_shift, phi_shift, verify_symbol_bounds};
use polycap::wiener::{
    classical_reference, classify, wiener_terms, Classification, DomainModel, ScaleRule,
};

fn all_dims(m_max: u32) -> Vec<Dims> {
    let mut out = Vec::new();
    for m in 1..=m_max {
        for n in 2..=(2 * m + 1) {
            out.push(Dims::new(m, n).unwrap());
        }
    }
    out
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn rat(v: i64) -> polycap::Rat {
    polycap::Rat::from_integer(v.into())
}

fn ratio(n: i64, d: i64) -> polycap::Rat {
    polycap::Rat::new(n.into(), d.into())
}

#[test]
fn criterion_1_coefficient_exactness() {
    let mut failures = Vec::new();
    for dims in all_dims(6) {
        let rep = verify_symbol_bounds(&coeff_table(&dims, 60));
        if !rep.passed() {
            failures.push(format!("({},{}): {:?}", dims.m, dims.n, rep.failures()));
        }
    }
    report(
        "1 (coefficient exactness)",
        failures.is_empty(),
        &if failures.is_empty() {
            "exact zero set, closed-form ratio, and positivity for m <= 6, p <= 60".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_2_quadrature_identity() {
    // Both sides are exact rationals here, so the 1e-8 bound is slack.
    let mut worst: f64 = 0.0;
    for dims in all_dims(3) {
        let q = oracle::bump(dims.m);
        for p in 0..=3u32 {
            for shift in [phi_shift(&dims), dirichlet_shift(&dims)] {
                let lhs = oracle::weighted_pairing(&dims, &shift, p, &q);
                let rhs = oracle::mode_form_value(&dims, &shift, p, &q);
                let denom = if rhs == rat(0) { rat(1) } else { rhs.clone() };
                let rel = num_traits::ToPrimitive::to_f64(&((lhs - &rhs) / denom))
                    .unwrap()
                    .abs();
                worst = worst.max(rel);
            }
        }
    }
    report(
        "2 (quadrature identity)",
        worst <= 1e-8,
        &format!("worst relative error {worst:.3e} for m <= 3, p <= 3, both forms"),
    );
}

#[test]
fn criterion_3_fundamental_solutions() {
    let grid: Vec<f64> = (-50..=50).map(|k| k as f64 / 10.0).collect();
    let mut failures = Vec::new();
    for dims in all_dims(6) {
        let h = fundsol(&dims).unwrap();
        let rep = verify_fundsol(&h, &grid);
        for c in rep.failures() {
            failures.push(format!("({},{}): {}", dims.m, dims.n, c.name));
        }
    }

    // Golden closed forms.
    let h13 = fundsol(&Dims::new(1, 3).unwrap()).unwrap();
    let golden13 = h13.plus_terms
        == vec![Term {
            rate: rat(-1),
            degree: 0,
            coeff: rat(1),
        }]
        && h13.minus_terms
            == vec![Term {
                rate: rat(0),
                degree: 0,
                coeff: rat(1),
            }];
    if !golden13 {
        failures.push("(1,3) golden mismatch".to_string());
    }
    let h23 = fundsol(&Dims::new(2, 3).unwrap()).unwrap();
    let golden23 = h23.plus_terms
        == vec![
            Term {
                rate: rat(-2),
                degree: 0,
                coeff: ratio(-1, 6),
            },
            Term {
                rate: rat(-1),
                degree: 0,
                coeff: ratio(1, 2),
            },
        ]
        || h23.plus_terms
            == vec![
                Term {
                    rate: rat(-1),
                    degree: 0,
                    coeff: ratio(1, 2),
                },
                Term {
                    rate: rat(-2),
                    degree: 0,
                    coeff: ratio(-1, 6),
                },
            ];
    if !golden23 {
        failures.push(format!("(2,3) golden mismatch: {:?}", h23.plus_terms));
    }
    let h22 = fundsol(&Dims::new(2, 2).unwrap()).unwrap();
    if h22.mu4 != ratio(1, 4) {
        failures.push(format!("(2,2) mu4 = {} != 1/4", h22.mu4));
    }

    report(
        "3 (fundamental solutions)",
        failures.is_empty(),
        &if failures.is_empty() {
            "exact continuity/jump, zero ODE residual, goldens for m <= 6".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_4_positivity_grid() {
    let grid: Vec<f64> = (-100..=100).map(|k| k as f64 / 10.0).collect();
    let mut failures = Vec::new();
    for dims in all_dims(5) {
        let h = fundsol(&dims).unwrap();
        let rep = verify_fundsol(&h, &grid);
        for c in rep.failures() {
            failures.push(format!("({},{}): {}", dims.m, dims.n, c.name));
        }
    }
    report(
        "4 (mode-operator positivity)",
        failures.is_empty(),
        &if failures.is_empty() {
            "nonnegative on {±k/10 : k <= 100} for m <= 5".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_5_harmonic_oracle() {
    let dims = Dims::new(1, 3).unwrap();
    let disc = Discretization::for_order(1);
    let rho = 0.7;
    let sphere = radial_compactum(vec![(rho, rho)]).unwrap();

    // Finite-annulus comparison against the explicit 1D solution.
    let mut worst: f64 = 0.0;
    for half_width in [2.0f64, 5.0, 10.0] {
        let amb = Annulus::new(rho * (-half_width).exp(), rho * half_width.exp()).unwrap();
        let engine = mode_capacity(&dims, Kind::Dirichlet, 0, &sphere, &amb, &disc).unwrap();
        let exact = oracle::sphere_mode_capacity_m1_n3(Kind::Dirichlet, 0, rho, &amb);
        worst = worst.max((engine - exact).abs() / exact);
    }

    // Wide-annulus limit: capacity tends to the radius.
    let wide = Annulus::new(rho * (-20.0f64).exp(), rho * 20f64.exp()).unwrap();
    let cap = mode_capacity(&dims, Kind::Dirichlet, 0, &sphere, &wide, &disc).unwrap();
    let limit_err = (cap - rho).abs() / rho;

    report(
        "5 (harmonic oracle)",
        worst <= 1e-6 && limit_err <= 0.01,
        &format!(
            "finite-annulus error {worst:.3e} (tol 1e-6), limit error {limit_err:.3e} (tol 1e-2)"
        ),
    );
}

#[test]
fn criterion_6_exact_scaling() {
    let shapes: Vec<RadialCompactum> = vec![
        radial_compactum(vec![(0.25, 0.5)]).unwrap(),
        radial_compactum(vec![(0.375, 0.375)]).unwrap(),
        radial_compactum(vec![(0.25, 0.3125), (0.4375, 0.5)]).unwrap(),
    ];
    let ambient = Annulus::new(1.0 / 16.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for dims in [(1, 3), (2, 3), (2, 2), (3, 4), (4, 5)] {
        let dims = Dims::new(dims.0, dims.1).unwrap();
        let disc = Discretization::for_order(dims.m);
        let p0 = index_set_z(&dims).members[0];
        for k in &shapes {
            let base = mode_capacity(&dims, Kind::Dirichlet, p0, k, &ambient, &disc).unwrap();
            for exp in [-3i32, -7, -20] {
                let s = 2f64.powi(exp);
                let scaled = mode_capacity(
                    &dims,
                    Kind::Dirichlet,
                    p0,
                    &scale_compactum(k, s),
                    &ambient.scale(s),
                    &disc,
                )
                .unwrap();
                let law = s.powi(dims.n as i32 - 2 * dims.m as i32);
                worst = worst.max((scaled - law * base).abs() / (law * base).abs());
            }
        }
    }
    report(
        "6 (exact scaling)",
        worst <= 1e-12,
        &format!("worst relative deviation from the s^(n-2m) law: {worst:.3e}"),
    );
}

struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn criterion_7_monotonicity() {
    let dims_list: Vec<Dims> = [(1, 3), (2, 3), (2, 2), (3, 4)]
        .iter()
        .map(|&(m, n)| Dims::new(m, n).unwrap())
        .collect();
    let ambient = Annulus::new(0.05, 4.0).unwrap();
    let wide = Annulus::new(0.05 / 4.0, 16.0).unwrap();
    let mut rng = Lcg(0x9e3779b97f4a7c15);
    let mut violations = Vec::new();

    for cfg in 0..50 {
        // Nested pair: K1 shrinks each shell of K2 by a positive margin.
        let a = 0.2 + 0.3 * rng.next_f64();
        let w = 0.05 + 0.3 * rng.next_f64();
        let b = (a + w).min(0.95);
        let margin = 0.02 + 0.3 * rng.next_f64() * w;
        let inner_a = a + margin.min(w * 0.4);
        let inner_b = b - margin.min(w * 0.4);
        let k2 = radial_compactum(vec![(a, b)]).unwrap();
        let k1 = radial_compactum(vec![(inner_a, inner_b)]).unwrap();
        let anchors = vec![a, b, inner_a, inner_b, 0.05, 4.0];

        let dims = &dims_list[cfg % dims_list.len()];
        let disc = Discretization {
            richardson: false,
            extra_anchor_radii: anchors,
            ..Discretization::for_order(dims.m)
        };
        let p0 = index_set_z(dims).members[0];
        let c1 = mode_capacity(dims, Kind::Dirichlet, p0, &k1, &ambient, &disc).unwrap();
        let c2 = mode_capacity(dims, Kind::Dirichlet, p0, &k2, &ambient, &disc).unwrap();
        if c1 > c2 * (1.0 + 1e-10) {
            violations.push(format!(
                "cfg {cfg} ({},{}): obstacle {c1} > {c2}",
                dims.m, dims.n
            ));
        }
        let cw = mode_capacity(dims, Kind::Dirichlet, p0, &k2, &wide, &disc).unwrap();
        if cw > c2 * (1.0 + 1e-10) {
            violations.push(format!(
                "cfg {cfg} ({},{}): ambient {cw} > {c2}",
                dims.m, dims.n
            ));
        }
    }
    report(
        "7 (monotonicity suite)",
        violations.is_empty(),
        &if violations.is_empty() {
            "50 nested configurations, zero violations beyond 1e-10".to_string()
        } else {
            violations.join("; ")
        },
    );
}

#[test]
fn criterion_8_equivalence_and_kelvin_brackets() {
    let shapes: Vec<RadialCompactum> = vec![
        radial_compactum(vec![(1.0, 2.0)]).unwrap(),
        radial_compactum(vec![(1.5, 1.5)]).unwrap(),
        radial_compactum(vec![(1.0, 1.25), (1.625, 2.0)]).unwrap(),
    ];
    let mut failures = Vec::new();
    for (m, n) in [(1u32, 3u32), (2, 3), (2, 2), (3, 4)] {
        let dims = Dims::new(m, n).unwrap();
        let coarse = Discretization::for_order(m);
        let fine = Discretization {
            target_h: coarse.target_h / 2.0,
            ..coarse.clone()
        };

        let brackets = |disc: &Discretization| -> (f64, f64, f64, f64) {
            let mut eq = (f64::INFINITY, 0.0f64);
            let mut kv = (f64::INFINITY, 0.0f64);
            for shape in &shapes {
                for kexp in 1..=10i32 {
                    let s = 2f64.powi(-kexp);
                    let k = scale_compactum(shape, s);
                    let amb = Annulus::new(0.5 * s, 8.0 * s).unwrap();
                    let cap_d = cap_inf(&dims, Kind::Dirichlet, &k, &amb, disc)
                        .unwrap()
                        .cap_inf;
                    let cap_phi = cap_inf(&dims, Kind::Phi, &k, &amb, disc).unwrap().cap_inf;
                    let law = s.powi(n as i32 - 2 * m as i32);
                    let r = cap_d / (law * cap_phi);
                    eq = (eq.0.min(r), eq.1.max(r));

                    let ki = kelvin_invert(&k);
                    let amb_i = Annulus::new(1.0 / (8.0 * s), 2.0 / s).unwrap();
                    let cap_i = cap_inf(&dims, Kind::Dirichlet, &ki, &amb_i, disc)
                        .unwrap()
                        .cap_inf;
                    let rk = s.powi(4 * m as i32 - 2 * n as i32) * cap_d / cap_i;
                    kv = (kv.0.min(rk), kv.1.max(rk));
                }
            }
            (eq.0, eq.1, kv.0, kv.1)
        };

        let (e0, e1, k0, k1) = brackets(&coarse);
        let (f0, f1, g0, g1) = brackets(&fine);
        let ok = e0 > 0.0 && k0 > 0.0 && e1.is_finite() && k1.is_finite();
        let drift = [(e0, f0), (e1, f1), (k0, g0), (k1, g1)]
            .iter()
            .map(|(a, b)| (a - b).abs() / a.abs())
            .fold(0.0f64, f64::max);
        if !ok || drift > 0.05 {
            failures.push(format!(
                "({m},{n}): eq bracket [{e0:.4},{e1:.4}], kelvin [{k0:.4},{k1:.4}], drift {drift:.3}"
            ));
        } else {
            println!(
                "  ({m},{n}) equivalence bracket [{e0:.4}, {e1:.4}], kelvin bracket [{k0:.4}, {k1:.4}], refinement drift {drift:.2e}"
            );
        }
    }
    report(
        "8 (equivalence and Kelvin brackets)",
        failures.is_empty(),
        &if failures.is_empty() {
            "positive brackets, refinement drift <= 5%".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_9a_full_model_diverges() {
    let mut failures = Vec::new();
    for dims in all_dims(6) {
        let disc = Discretization::for_order(dims.m);
        let s = wiener_terms(&dims, &DomainModel::Full, 0, 8, &disc).unwrap();
        let v = classify(&s, &DomainModel::Full).unwrap();
        if v.classification != Classification::DivergesByBound {
            failures.push(format!("({},{}): {:?}", dims.m, dims.n, v.classification));
        }
    }
    report(
        "9a (full model diverges)",
        failures.is_empty(),
        &if failures.is_empty() {
            "diverges-by-bound for every (m,n), m <= 6".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_9b_sphere_linear_rule_matches_classical() {
    let dims = Dims::new(1, 3).unwrap();
    let disc = Discretization::for_order(1);
    let model = DomainModel::Sphere {
        cap_scale: ScaleRule { power: 1 },
    };
    let s = wiener_terms(&dims, &model, 0, 8, &disc).unwrap();
    let v = classify(&s, &model).unwrap();
    let classical = classical_reference(&model, 0, 8, &disc).unwrap();
    let ratios: Vec<f64> = s
        .rows
        .iter()
        .zip(&classical.rows)
        .map(|(a, b)| a.term / b.term)
        .collect();
    let (rmin, rmax) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let constancy = (rmax - rmin) / rmin;
    report(
        "9b (sphere 2^-j rule)",
        v.classification == Classification::DivergesByBound && constancy <= 0.01,
        &format!(
            "classification {:?}, classical term-ratio constancy {constancy:.3e} (tol 1e-2)",
            v.classification
        ),
    );
}

#[test]
fn criterion_9c_sphere_cubic_rule_converges() {
    let dims = Dims::new(1, 3).unwrap();
    let disc = Discretization::for_order(1);
    let model = DomainModel::Sphere {
        cap_scale: ScaleRule { power: 3 },
    };
    let s = wiener_terms(&dims, &model, 0, 8, &disc).unwrap();
    let v = classify(&s, &model).unwrap();
    let ok = v.classification == Classification::ConvergesNumerically
        && v.rationale.contains("super-geometric");
    report(
        "9c (sphere 2^-j^3 rule)",
        ok,
        &format!("classification {:?}: {}", v.classification, v.rationale),
    );
}

#[test]
fn criterion_9d_even_dimension_growth() {
    let dims = Dims::new(2, 2).unwrap();
    let disc = Discretization::for_order(2);
    let s = wiener_terms(&dims, &DomainModel::Full, 0, 48, &disc).unwrap();
    // Terms are j × (a scale-independent constant), so partial sums grow
    // like K j²/2; estimate K from a wide difference of partial sums.
    let per_term_k = s.rows[10].term / 10.0;
    let s24 = s.rows[24].partial_sum;
    let s48 = s.rows[48].partial_sum;
    let slope = (s48 - s24) / ((48.0f64.powi(2) - 24.0f64.powi(2)) / 2.0);
    let rel = (slope - per_term_k).abs() / per_term_k;
    report(
        "9d (even-dimension j-factor)",
        rel <= 0.02,
        &format!(
            "partial-sum slope vs j²/2 gives K = {slope:.6e}, per-term K = {per_term_k:.6e}, \
             relative difference {rel:.3e} (tol 2e-2)"
        ),
    );
}

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use steklov_core::bounds::{
    blowup_experiment, constants, fit_asymptotics, injectivity_bound, isoperimetric_bound, obstruction_experiment,
    volume_bound, BlowupOptions, BoundInputs, ConstantsConfig,
};
use steklov_core::geometry::{
    family_injectivity_radius, generate_mesh, EmbeddedMesh, FaceTag, FamilyDescriptor, FamilyVariant,
};
use steklov_core::index::{
    concentration_audit, degree_product, degree_upper_bound, estimate_index, family_index_bounds,
    plane_mesh_intersections, IndexOptions,
};
use steklov_core::oracles::{
    annulus_sn_eigenvalue, separated_mode_sn_eigenvalue, sphere_cylinder_spectrum, SeparatedModeProblem,
};
use steklov_core::packing::{certify_sigma_k_against, choose_radius, empirical_config};
use steklov_core::spectral::{solve_steklov, EigenMethod, ProblemKind, SpectralProblem};
use steklov_core::spheres::unit_sphere_area;

fn report(criterion: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {criterion:02} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn mesh(variant: FamilyVariant, h: f64) -> EmbeddedMesh {
    generate_mesh(&FamilyDescriptor::new(variant, h)).unwrap()
}

fn kind_of(m: &EmbeddedMesh) -> ProblemKind {
    if m.boundary_volume(FaceTag::Neumann) > 0.0 {
        ProblemKind::SteklovNeumann
    } else {
        ProblemKind::Steklov
    }
}

fn spectrum(m: &EmbeddedMesh, k_max: usize) -> Vec<f64> {
    solve_steklov(&SpectralProblem::new(m, kind_of(m), k_max)).unwrap().eigenvalues
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_01_disk_oracle() {
    let start = Instant::now();
    let m = mesh(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.05);
    let sigma = spectrum(&m, 6);
    let exact = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
    let worst = sigma[1..].iter().zip(&exact[1..]).map(|(a, b)| rel_err(*a, *b)).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = sigma[0].abs() <= 1e-8 && worst <= 0.01 && secs <= 60.0;
    report(1, "disk spectrum", pass, format!("sigma = {sigma:.5?}, worst rel err {worst:.2e}, {secs:.1} s"));
}

#[test]
fn criterion_02_annulus_mixed() {
    let m = mesh(FamilyVariant::AnnulusFlat { n: 2, eps: 1.0, delta: 2.0 }, 0.05);
    let fem = spectrum(&m, 1)[1];
    let closed = annulus_sn_eigenvalue(2, 1.0, 2.0, 1).unwrap();
    let radial = separated_mode_sn_eigenvalue(&SeparatedModeProblem {
        n: 2,
        eps: 1.0,
        delta: 2.0,
        mu: 1.0,
        lambda: 0.0,
        radial_resolution: 2000,
    })
    .unwrap();
    let pass = rel_err(fem, 0.6) <= 0.01 && (closed - 0.6).abs() <= 1e-12 && (radial - 0.6).abs() <= 1e-4;
    report(2, "annulus mixed sigma_1", pass, format!("fem {fem:.6}, closed form {closed:.12}, radial {radial:.8}"));
}

#[test]
fn criterion_03_cylinder_closed_form() {
    let (radius, length) = (1.0, 1.0);
    let oracle = sphere_cylinder_spectrum(2, radius, length, 6).unwrap();
    let mut direct = vec![0.0, 2.0 / length];
    for j in 1..10 {
        let s = j as f64 / radius;
        for _ in 0..2 {
            direct.push(s * (s * length / 2.0).tanh());
            direct.push(s / (s * length / 2.0).tanh());
        }
    }
    direct.sort_by(f64::total_cmp);
    let oracle_exact = oracle.iter().zip(&direct).all(|(a, b)| (a - b).abs() <= 1e-14 * b.max(1.0));
    let m = mesh(FamilyVariant::CylinderSurface { radius, length }, 0.05);
    let fem = spectrum(&m, 5);
    let worst = fem[1..].iter().zip(&oracle[1..]).map(|(a, b)| rel_err(*a, *b)).fold(0.0, f64::max);
    let pass = oracle_exact && fem[0].abs() <= 1e-8 && worst <= 0.01;
    report(3, "cylinder spectrum", pass, format!("oracle {oracle:.6?}, fem {fem:.6?}, worst rel err {worst:.2e}"));
}

#[test]
fn criterion_04_asymptotics() {
    let disk: Vec<f64> = (0..=200).map(|k: usize| k.div_ceil(2) as f64).collect();
    let cyl = sphere_cylinder_spectrum(2, 1.0, 1.0, 201).unwrap();
    let fd = fit_asymptotics(&disk, 2, 2.0 * PI, 20, 200).unwrap();
    let fc = fit_asymptotics(&cyl, 2, 4.0 * PI, 20, 200).unwrap();
    let ok = |f: &steklov_core::bounds::AsymptoticFit| {
        (f.fitted_exponent - 1.0).abs() <= 0.05 && rel_err(f.fitted_coefficient, f.predicted_coefficient) <= 0.1
    };
    report(
        4,
        "Weyl asymptotics",
        ok(&fd) && ok(&fc),
        format!(
            "disk exponent {:.4} coefficient {:.4} vs {:.4}; cylinder exponent {:.4} coefficient {:.4} vs {:.4}",
            fd.fitted_exponent,
            fd.fitted_coefficient,
            fd.predicted_coefficient,
            fc.fitted_exponent,
            fc.fitted_coefficient,
            fc.predicted_coefficient
        ),
    );
}

#[test]
fn criterion_05_index_estimation() {
    let circle_variant = FamilyVariant::SphereBoundary { n: 2, eps: 1.0 };
    let circle = mesh(circle_variant, 0.02);
    let ec = estimate_index(&circle, &IndexOptions::new(1000, 1)).unwrap();
    let torus_variant = FamilyVariant::Torus { major: 1.0, minor: 0.4 };
    let torus = mesh(torus_variant, 0.025);
    let et = estimate_index(&torus, &IndexOptions::new(100_000, 2).with_hill_climb(true)).unwrap();
    let bc = family_index_bounds(&circle_variant).mesh;
    let bt = family_index_bounds(&torus_variant).mesh;
    let recount = plane_mesh_intersections(&et.witness_plane, &torus).unwrap() == et.sampled_max
        && plane_mesh_intersections(&ec.witness_plane, &circle).unwrap() == ec.sampled_max;
    let z1 = degree_product(&[1, 2]).unwrap();
    let z2 = degree_product(&[1, 2]).unwrap();
    let z3 = degree_product(&[4, 2]).unwrap();
    let union = degree_upper_bound(&[vec![1, 2], vec![1, 2], vec![4, 2]]).unwrap();
    let pass = ec.sampled_max == 2
        && et.sampled_max == 4
        && (ec.sampled_max as u64) <= bc
        && (et.sampled_max as u64) <= bt
        && (bc, bt) == (2, 4)
        && recount
        && (z1, z2, z3, union) == (2, 2, 8, 12);
    report(
        5,
        "intersection index",
        pass,
        format!(
            "circle {} (bound {bc}), torus {} (bound {bt}, {} samples, {} hill-climb gains), unions {z1} {z2} {z3} {union}",
            ec.sampled_max, et.sampled_max, et.samples, et.hill_climb_improvements
        ),
    );
}

#[test]
fn criterion_06_concentration_audit() {
    let cases = [
        ("circle", FamilyVariant::SphereBoundary { n: 2, eps: 1.0 }, 0.05),
        ("torus", FamilyVariant::Torus { major: 1.0, minor: 0.4 }, 0.1),
        ("revolution closure", FamilyVariant::RevolutionClosure { n: 2, eps: 0.5, delta: 1.0 }, 0.15),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, (name, variant, h)) in cases.into_iter().enumerate() {
        let m = mesh(variant, h);
        let bound = family_index_bounds(&variant).mesh;
        let audit = concentration_audit(&m, bound, 10_000, 100 + i as u64).unwrap();
        pass &= audit.worst_ratio <= 1.05;
        detail.push(format!("{name} i={bound} worst {:.4}", audit.worst_ratio));
    }
    report(6, "ball concentration", pass, detail.join(", "));
}

#[test]
fn criterion_07_packing_certificates() {
    // Radii shrink like 1/(2k+2); one mesh per family resolves k = 3.
    let cases = [
        ("disk", FamilyVariant::BallFlat { n: 2, delta: 1.0 }),
        ("annulus", FamilyVariant::AnnulusFlat { n: 2, eps: 1.0, delta: 2.0 }),
        ("cylinder", FamilyVariant::CylinderSurface { radius: 1.0, length: 2.0 }),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, variant) in cases {
        let bounds = family_index_bounds(&variant);
        let i_sigma = bounds.steklov.unwrap() as f64;
        let desc = FamilyDescriptor::new(variant, 1.0);
        let r3 = choose_radius(desc.exact_steklov_volume(), i_sigma, 3, 2, 2.0).unwrap();
        let m = mesh(variant, 0.6 * r3);
        let problem = SpectralProblem::new(&m, kind_of(&m), 3).with_method(EigenMethod::Subspace);
        let sigma = solve_steklov(&problem).unwrap().eigenvalues;
        for k in 1..=3 {
            let cfg = empirical_config(&m, k, i_sigma, k as u64).unwrap();
            let cert = match certify_sigma_k_against(&m, k, &cfg, i_sigma, Some(&sigma)) {
                Ok(c) => c,
                Err(e) => {
                    pass = false;
                    detail.push(format!("{name} k={k}: {e}"));
                    continue;
                }
            };
            let inputs = BoundInputs {
                n: 2,
                m: m.ambient_dim(),
                volume_m: m.volume(),
                volume_sigma: m.boundary_volume(FaceTag::Steklov),
                i_m: bounds.mesh as f64,
                i_sigma,
                r0: None,
                k,
                constants: cfg,
            };
            let rhs = volume_bound(&inputs).unwrap();
            let total: f64 = m.boundary_volume(FaceTag::Steklov);
            let sets_ok = cert.sets.len() == 2 * k + 2
                && cert.set_measures.iter().all(|&mu| mu >= total / (2.0 * cfg.c_cover * (2 * k + 2) as f64))
                && cert.separation >= 3.0 * cert.r;
            let ok = cert.valid && cert.fem_sigma_k <= cert.certified_bound && cert.certified_bound <= rhs && sets_ok;
            pass &= ok;
            detail.push(format!(
                "{name} k={k} C={} r={:.4e}: {:.4} <= {:.4} <= {:.4e}{}",
                cfg.c_cover,
                cert.r,
                cert.fem_sigma_k,
                cert.certified_bound,
                rhs,
                if sets_ok { "" } else { " (set conclusions fail)" }
            ));
        }
    }
    report(7, "packing certificates", pass, detail.join("; "));
}

#[test]
fn criterion_08_ambient_constant_dominance() {
    let cases = [
        (FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.1),
        (FamilyVariant::BallFlat { n: 3, delta: 1.0 }, 0.3),
        (FamilyVariant::AnnulusFlat { n: 2, eps: 1.0, delta: 2.0 }, 0.1),
        (FamilyVariant::AnnulusFlat { n: 3, eps: 0.5, delta: 1.0 }, 0.2),
        (FamilyVariant::CylinderSurface { radius: 1.0, length: 2.0 }, 0.1),
        (FamilyVariant::ProductAnnulusCircle { n: 2, eps: 0.5, delta: 1.0, circle_radius: 0.5 }, 0.2),
        (FamilyVariant::RevolutionClosure { n: 2, eps: 0.5, delta: 1.0 }, 0.15),
    ];
    let k_max = 4;
    let mut pass = true;
    let mut detail = Vec::new();
    for (variant, h) in cases {
        let m = mesh(variant, h);
        let sigma = spectrum(&m, k_max);
        let b = family_index_bounds(&variant);
        let n = m.intrinsic_dim();
        for k in 1..=k_max {
            let inputs = BoundInputs {
                n,
                m: m.ambient_dim(),
                volume_m: m.volume(),
                volume_sigma: m.boundary_volume(FaceTag::Steklov),
                i_m: b.mesh as f64,
                i_sigma: b.steklov.unwrap() as f64,
                r0: family_injectivity_radius(&variant),
                k,
                constants: ConstantsConfig::ambient(m.ambient_dim()),
            };
            let v = volume_bound(&inputs).unwrap();
            let (inj, _) = injectivity_bound(&inputs).unwrap();
            let ok = sigma[k] <= v && sigma[k] <= inj;
            pass &= ok;
            if k == 1 || !ok {
                detail.push(format!("{variant:?} k={k}: {:.4} <= {v:.3e}, {inj:.3e}", sigma[k]));
            }
        }
    }
    report(8, "bound dominance with 32^m", pass, detail.join("; "));
}

#[test]
fn criterion_09_blowup() {
    let start = Instant::now();
    let eps = [0.4, 0.2, 0.1];
    let rows = blowup_experiment(3, &eps, &BlowupOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let c_hat_ok = rows.iter().all(|r| (r.c_hat - 0.25).abs() < 1e-15);
    let bounds_ok = rows.iter().all(|r| r.satisfied && r.tail_certified && r.mode_minimum >= 0.25 / r.epsilon);
    let first_ok = rows.iter().all(|r| r.first_mode_value >= r.first_mode_bound && (r.first_mode_bound * r.epsilon - 1.4).abs() < 1e-12);
    let monotone = rows.windows(2).all(|w| w[1].mode_minimum > w[0].mode_minimum);
    let pass = c_hat_ok && bounds_ok && first_ok && monotone && secs <= 120.0;
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("eps {} min {:.4} >= {:.4}, first {:.4} >= {:.4}", r.epsilon, r.mode_minimum, r.c_hat_over_eps, r.first_mode_value, r.first_mode_bound))
        .collect();
    report(9, "blow-up", pass, format!("{}; {secs:.1} s", table.join("; ")));
}

#[test]
fn criterion_10_obstruction() {
    let ks: Vec<usize> = (10..=200).collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for beta in [0.0, 1.0] {
        let rep = obstruction_experiment(2, 1.0 + beta, beta, &ks).unwrap();
        pass &= (rep.fitted_exponent - (1.0 + beta)).abs() <= 0.05 && rep.consistent && rep.alpha_admissible;
        detail.push(format!("beta {beta}: exponent {:.4}", rep.fitted_exponent));
    }
    report(10, "obstruction", pass, detail.join(", "));
}

fn random_inputs() -> impl Strategy<Value = BoundInputs> {
    (2usize..5, 0usize..3, 0.1f64..10.0, 0.1f64..10.0, 1u32..10, 1u32..10, 0.01f64..2.0, 1usize..50, 1.5f64..40.0)
        .prop_map(|(n, extra, vm, vs, im, is, r0, k, c)| BoundInputs {
            n,
            m: n + extra,
            volume_m: vm,
            volume_sigma: vs,
            i_m: im as f64,
            i_sigma: is as f64,
            r0: Some(r0),
            k,
            constants: ConstantsConfig::empirical(c),
        })
}

fn coarse_mixed_family() -> impl Strategy<Value = (FamilyVariant, f64)> {
    prop_oneof![
        (0.6f64..1.5).prop_map(|d| (FamilyVariant::BallFlat { n: 2, delta: d }, 0.3 * d)),
        (0.3f64..0.7).prop_map(|e| (FamilyVariant::AnnulusFlat { n: 2, eps: e, delta: 1.0 }, 0.15)),
        (0.5f64..2.0).prop_map(|l| (FamilyVariant::CylinderSurface { radius: 1.0, length: l }, 0.4)),
    ]
}

fn run(name: &str, cases: u32, test: impl Fn(&mut TestRunner) -> Result<(), String>) -> Result<String, String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    test(&mut runner).map(|_| format!("{name} ({cases} trials)"))
}

#[test]
fn criterion_11_property_suites() {
    let k_max = 3;
    let results = vec![
        run("scale covariance", 100, |r| {
            r.run(&(coarse_mixed_family(), 0.2f64..5.0), |((variant, h), t)| {
                let m = mesh(variant, h);
                let a = spectrum(&m, k_max);
                let b = spectrum(&m.scaled(t).unwrap(), k_max);
                for k in 1..=k_max {
                    prop_assert!(rel_err(b[k] * t, a[k]) <= 1e-8, "k={} {} vs {}", k, b[k] * t, a[k]);
                }
                let (e, d) = (0.3 * t, 0.9 * t);
                let s = annulus_sn_eigenvalue(3, e, d, 2).unwrap() * t;
                prop_assert!(rel_err(s, annulus_sn_eigenvalue(3, 0.3, 0.9, 2).unwrap()) <= 1e-12);
                let c = sphere_cylinder_spectrum(2, t, 2.0 * t, 5).unwrap();
                let c1 = sphere_cylinder_spectrum(2, 1.0, 2.0, 5).unwrap();
                for k in 1..5 {
                    prop_assert!(rel_err(c[k] * t, c1[k]) <= 1e-12);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run("rigid motion", 100, |r| {
            let angles = (0.0f64..2.0 * PI, 0.0f64..PI, 0.0f64..2.0 * PI);
            let shift = prop::array::uniform3(-5.0f64..5.0);
            r.run(&(coarse_mixed_family(), angles, shift), |((variant, h), (a1, a2, a3), s)| {
                let m = mesh(variant, h);
                let lift = |p: &[f64]| if p.len() == 2 { [p[0], p[1], 0.0] } else { [p[0], p[1], p[2]] };
                let rot = |a: f64, b: f64, c: f64, p: [f64; 3]| {
                    let (x, y, z) = (p[0], p[1], p[2]);
                    let (x, y) = (a.cos() * x - a.sin() * y, a.sin() * x + a.cos() * y);
                    let (y, z) = (b.cos() * y - b.sin() * z, b.sin() * y + b.cos() * z);
                    let (x, y) = (c.cos() * x - c.sin() * y, c.sin() * x + c.cos() * y);
                    [x, y, z]
                };
                let base = m.map_vertices(|p| lift(p).to_vec()).unwrap();
                let moved = m
                    .map_vertices(|p| {
                        let q = rot(a1, a2, a3, lift(p));
                        vec![q[0] + s[0], q[1] + s[1], q[2] + s[2]]
                    })
                    .unwrap();
                let a = spectrum(&base, k_max);
                let b = spectrum(&moved, k_max);
                for k in 1..=k_max {
                    prop_assert!(rel_err(b[k], a[k]) <= 1e-8, "k={} {} vs {}", k, b[k], a[k]);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run("Steklov-Neumann bracketing", 100, |r| {
            r.run(&(0.3f64..0.6, 0.05f64..0.5, 0u64..1000), |(eps, frac, seed)| {
                // Restricting to a sub-annulus around the Steklov circle with a
                // Neumann cut never raises sigma_k; retagging Steklov faces as
                // Neumann never lowers it.
                let m = mesh(FamilyVariant::AnnulusFlat { n: 2, eps, delta: 1.0 }, 0.12);
                let full = spectrum(&m, k_max);
                let cut = eps + (1.0 - eps) * (0.4 + 0.5 * frac);
                let keep: Vec<bool> = m
                    .cells()
                    .map(|c| {
                        let r = c.iter().map(|&v| m.vertex(v)[0].hypot(m.vertex(v)[1])).sum::<f64>() / c.len() as f64;
                        r <= cut
                    })
                    .collect();
                let sub = m.restrict_cells(&keep, FaceTag::Neumann).unwrap();
                let inner = spectrum(&sub, k_max);
                for k in 1..=k_max {
                    prop_assert!(inner[k] <= full[k] * (1.0 + 1e-8), "restriction k={} {} > {}", k, inner[k], full[k]);
                }
                let phase = (seed as f64) * 0.001 * 2.0 * PI;
                let retagged = m
                    .retagged(|_, face| {
                        let p = m.vertex(face.indices[0]);
                        let angle = (p[1].atan2(p[0]) - phase).rem_euclid(2.0 * PI);
                        if face.tag == FaceTag::Steklov && angle < frac * PI { FaceTag::Neumann } else { face.tag }
                    })
                    .unwrap();
                let raised = spectrum(&retagged, k_max);
                for k in 1..=k_max {
                    prop_assert!(raised[k] >= full[k] * (1.0 - 1e-8), "retag k={} {} < {}", k, raised[k], full[k]);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run("corollary identity", 100, |r| {
            r.run(&random_inputs(), |inp| {
                let (lhs, rhs) = isoperimetric_bound(&inp).unwrap();
                let v = volume_bound(&inp).unwrap();
                prop_assert!(rel_err(rhs, lhs * v) <= 1e-12, "{} vs {}", rhs, lhs * v);
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run("k0 branch consistency", 100, |r| {
            r.run(&random_inputs(), |inp| {
                let (rhs, k0) = injectivity_bound(&inp).unwrap();
                let c = constants(inp.n, inp.m, &inp.constants).unwrap();
                let r0 = inp.r0.unwrap();
                prop_assert!(rhs >= c.a_tilde * inp.i_m / r0);
                let direct = inp.volume_sigma
                    / (2.0 * c.c_m * c.c_m * unit_sphere_area(inp.n - 1) * inp.i_sigma * r0.powi(inp.n as i32 - 1));
                prop_assert!(rel_err(k0, direct) <= 1e-12);
                let r = choose_radius(inp.volume_sigma, inp.i_sigma, inp.k, inp.n, c.c_m).unwrap();
                let large_k = (2 * inp.k + 2) as f64 >= k0;
                prop_assert_eq!(large_k, r <= r0 * (1.0 + 1e-12), "k0 {} k {} r {} r0 {}", k0, inp.k, r, r0);
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    ];
    let pass = results.iter().all(|r| r.is_ok());
    let detail: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    report(11, "property suites", pass, detail.join(", "));
}

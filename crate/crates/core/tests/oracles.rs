//! Cross-checks against independent references and invariances of the
//! whole pipeline.

use proptest::prelude::*;
use weighted_advdiff::assembly::{assemble_equilibrated_weighted, assemble_weighted, discretize};
use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::quadrature::{exp_moment, integrate_exp_poly};
use weighted_advdiff::solve::thomas;
use weighted_advdiff::stencils::cothm;
use weighted_advdiff::verify::{mirror_check, oracle};
use weighted_advdiff::{Formulation, Interval, Problem, TriDiagSystem, WeightFunction};

proptest! {
    #[test]
    fn thomas_matches_dense_elimination(
        n in 1usize..40,
        seed in proptest::collection::vec(-1.0f64..1.0, 160),
    ) {
        let sub: Vec<f64> = seed[..n - 1].to_vec();
        let sup: Vec<f64> = seed[40..40 + n - 1].to_vec();
        let rhs: Vec<f64> = seed[80..80 + n].to_vec();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let off = if i > 0 { sub[i - 1].abs() } else { 0.0 } + if i + 1 < n { sup[i].abs() } else { 0.0 };
                (off + 0.5 + seed[120 + i].abs()) * if seed[120 + i] < 0.0 { -1.0 } else { 1.0 }
            })
            .collect();
        let sys = TriDiagSystem::new(sub, diag, sup, rhs).unwrap();
        let x = thomas(&sys).unwrap();
        let r = oracle::dense_solve(sys.to_dense(), sys.rhs.clone()).unwrap();
        let scale = r.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in x.iter().zip(&r) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn cothm_matches_high_precision(x in 1e-8f64..30.0) {
        let r = oracle::cothm(x);
        prop_assert!(((cothm(x) - r) / r).abs() <= 1e-15);
    }

    #[test]
    fn exp_poly_matches_closed_form(
        z in 1e-6f64..10.0,
        negative in any::<bool>(),
        len in 0.01f64..1.0,
        x0 in 0.0f64..1.0,
        poly in proptest::collection::vec(0.0f64..1.0, 1..5),
    ) {
        let a = if negative { -z / len } else { z / len };
        let x0 = x0.min(40.0 / a.abs());
        let got = integrate_exp_poly(a, &poly, x0, x0 + len);
        let r = oracle::exp_poly_integral(a, &poly, x0, x0 + len);
        prop_assert!(((got - r) / r).abs() <= 1e-13, "{} vs {}", got, r);
    }

    #[test]
    fn equilibrated_system_ignores_weight_normalization(
        ratio in 0.1f64..200.0,
        exponent in -6i32..=6,
    ) {
        let problem = Problem::model(1.0, 1.0 / ratio, 1.0).unwrap();
        let mesh = build_uniform(Interval::UNIT, 10).unwrap();
        let w = WeightFunction::for_problem(&problem, &mesh);
        let a = assemble_equilibrated_weighted(&problem, &mesh, &w).unwrap();
        let b = assemble_equilibrated_weighted(&problem, &mesh, &w.rescaled(10f64.powi(exponent))).unwrap();
        let scale = a.inf_norm();
        for i in 0..a.n() {
            for (x, y) in a.row(i).iter().zip(b.row(i)) {
                prop_assert!((x - y).abs() <= 1e-14 * scale);
            }
            prop_assert!((a.rhs[i] - b.rhs[i]).abs() <= 1e-14 * a.rhs[i].abs().max(1.0));
        }
    }
}

#[test]
fn exp_moment_small_arguments_against_oracle() {
    for &z in &[1e-6, -1e-6, 3e-5, 1e-4, -1e-3, 1e-2, -1e-2] {
        for m in 0..4 {
            let mut poly = vec![0.0; m + 1];
            poly[m] = 1.0;
            let r = oracle::exp_poly_integral(z, &poly, 0.0, 1.0);
            assert!(((exp_moment(m, z) - r) / r).abs() <= 1e-15, "m = {m}, z = {z}");
        }
    }
}

#[test]
fn raw_weighted_rescaling_scales_rows() {
    let problem = Problem::model(4.0, 1.0, 1.0).unwrap();
    let mesh = build_uniform(Interval::UNIT, 8).unwrap();
    let w = WeightFunction::for_problem(&problem, &mesh);
    let a = assemble_weighted(&problem, &mesh, &w).unwrap();
    let b = assemble_weighted(&problem, &mesh, &w.rescaled(1e6)).unwrap();
    for i in 0..a.n() {
        assert!((b.diag[i] / a.diag[i] - 1e6).abs() <= 1e-8);
    }
}

#[test]
fn mirrored_problems_have_mirrored_solutions() {
    let mesh = build_uniform(Interval::UNIT, 16).unwrap();
    for ratio in [1.0, 10.0, 100.0] {
        let p = Problem::model(1.0, 1.0 / ratio, 1.0).unwrap();
        for f in Formulation::ALL {
            assert!(mirror_check(&p, &mesh, f).unwrap() <= 1e-10, "{f} ratio {ratio}");
        }
    }
}

#[test]
fn discretized_residuals_are_backward_stable() {
    let mesh = build_uniform(Interval::UNIT, 10).unwrap();
    for ratio in [1.0, 10.0, 50.0, 100.0] {
        let p = Problem::model(1.0, 1.0 / ratio, 1.0).unwrap();
        for f in Formulation::ALL {
            let sys = discretize(&p, &mesh, f).unwrap();
            let u = thomas(&sys).unwrap();
            let unorm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let bnorm = sys.rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(sys.residual_inf(&u) <= 1e-10 * (sys.inf_norm() * unorm + bnorm));
        }
    }
}

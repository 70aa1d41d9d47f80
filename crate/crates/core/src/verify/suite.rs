//! The acceptance criteria as data-producing checks. Each criterion returns a
//! list of named measurements with the tolerance they are held to; the
//! `verify` subcommand and the acceptance test target both run these.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{model_problem, nodal_exactness, oracle, stationarity_check, functional_value, vainberg_symmetry, convergence_study};
use crate::assembly::{assemble, assemble_symmetric_scaled, lumped_mass, Formulation, TriDiagSystem};
use crate::mesh::build_uniform;
use crate::problem::{validate, BoundaryConditions, Field, Interval, Problem, ProblemSpec};
use crate::quadrature::integrate_exp_poly;
use crate::solve::{condition_estimate, solve, thomas};
use crate::stencils::{cothm, gamma_stencil, kbar, optimal_stencil};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_190_601;

/// The element-length ratios used by the nodal-exactness sweep.
pub const ACCEPTANCE_RATIOS: [f64; 4] = [1.0, 10.0, 50.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// Measured and reported only.
    Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl CheckResult {
    pub fn at_most(check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let pass = value <= tolerance;
        CheckResult { check: check.into(), value, tolerance, relation: Relation::AtMost, pass }
    }

    pub fn at_least(check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let pass = value >= tolerance;
        CheckResult { check: check.into(), value, tolerance, relation: Relation::AtLeast, pass }
    }

    pub fn report(check: impl Into<String>, value: f64) -> Self {
        CheckResult { check: check.into(), value, tolerance: f64::NAN, relation: Relation::Report, pass: true }
    }

    fn failed(check: impl Into<String>, err: &Error) -> Self {
        CheckResult {
            check: format!("{}: {err}", check.into()),
            value: f64::NAN,
            tolerance: f64::NAN,
            relation: Relation::AtMost,
            pass: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<CheckResult>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Number of failing checks.
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "nodal exactness of the stabilized formulations"),
    (2, "weighted and optimal stencils coincide"),
    (3, "galerkin oscillations at Pe = 5"),
    (4, "operator symmetry"),
    (5, "stationarity of the weighted functional"),
    (6, "special functions and kbar limits"),
    (7, "second-order L2 convergence"),
    (8, "solver and quadrature oracles"),
    (9, "conditioning before and after scaling"),
];

/// Wall-clock budget in seconds where one applies.
pub fn runtime_limit(id: u8) -> Option<f64> {
    match id {
        1 | 3 | 4 | 5 => Some(1.0),
        2 => Some(5.0),
        7 => Some(2.0),
        _ => None,
    }
}

pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionReport> {
    let title = CRITERIA.iter().find(|(i, _)| *i == id)?.1;
    let start = Instant::now();
    let checks = match id {
        1 => nodal_exactness_checks(),
        2 => stencil_equivalence_checks(seed),
        3 => galerkin_pathology_checks(),
        4 => symmetry_checks(),
        5 => stationarity_checks(),
        6 => special_function_checks(),
        7 => convergence_checks(),
        8 => oracle_checks(seed),
        9 => conditioning_checks(),
        _ => return None,
    };
    Some(CriterionReport { id, title, checks, elapsed: start.elapsed() })
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|&(id, _)| run_criterion(id, seed)).collect()
}

fn collect(name: &str, r: Result<Vec<CheckResult>>) -> Vec<CheckResult> {
    r.unwrap_or_else(|e| vec![CheckResult::failed(name, &e)])
}

fn unit_mesh(n: usize) -> Result<crate::Mesh1D> {
    build_uniform(Interval::UNIT, n)
}

fn backward_check(name: String, sys: &TriDiagSystem, u: &[f64]) -> CheckResult {
    let unorm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bnorm = sys.rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = sys.inf_norm() * unorm + bnorm;
    CheckResult::at_most(name, sys.residual_inf(u) / scale, 1e-10)
}

fn nodal_exactness_checks() -> Vec<CheckResult> {
    collect("c1", (|| {
        let mesh = unit_mesh(10)?;
        let mut out = Vec::new();
        for ratio in ACCEPTANCE_RATIOS {
            let problem = model_problem(ratio)?;
            for f in [Formulation::ArtificialDiffusion, Formulation::WeightedVariational] {
                let e = nodal_exactness(&problem, &mesh, f)?;
                out.push(CheckResult::at_most(format!("c1.max_nodal_error.{f}.ratio={ratio}"), e.max_error, 1e-10));
                let sys = crate::assembly::discretize(&problem, &mesh, f)?;
                let u = thomas(&sys)?;
                out.push(backward_check(format!("c1.backward_residual.{f}.ratio={ratio}"), &sys, &u));
            }
        }
        Ok(out)
    })())
}

/// Distance in units in the last place between two finite doubles.
pub fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn stencil_equivalence_checks(seed: u64) -> Vec<CheckResult> {
    collect("c2", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = 200;
        let (mut worst_ulps, mut worst_rel) = (0u64, 0.0f64);
        let (mut pe_min, mut pe_max) = (f64::INFINITY, 0.0f64);
        for _ in 0..samples {
            let pe = log_uniform(&mut rng, 1e-3, 20.0);
            let k = log_uniform(&mut rng, 1e-2, 10.0);
            let h = log_uniform(&mut rng, 1e-2, 1.0);
            let v = 2.0 * k * pe / h;
            pe_min = pe_min.min(pe);
            pe_max = pe_max.max(pe);

            let beta = optimal_stencil(v, k, h).as_array();
            let gamma = gamma_stencil(v, k, h);
            for (b, g) in beta.iter().zip(gamma.as_array()) {
                worst_ulps = worst_ulps.max(ulps_apart(*b, g));
            }

            // Four elements on [0, 4h] give three interior rows.
            let spec = ProblemSpec::new(v, k, 1.0, Interval::new(0.0, 4.0 * h));
            let problem = validate(spec, BoundaryConditions::homogeneous_dirichlet())?;
            let mesh = build_uniform(problem.domain(), 4)?;
            let f = Formulation::WeightedVariational;
            let sys = assemble(&problem, &mesh, f)?.row_equilibrate(&lumped_mass(&problem, &mesh, f)?)?;
            for j in 1..4 {
                let [l, c, r] = sys.row(j);
                let row = crate::StencilCoeffs::new(l, c, r, f);
                worst_rel = worst_rel.max(row.rel_diff(&gamma));
            }
        }
        Ok(vec![
            CheckResult::at_least("c2.samples", samples as f64, 200.0),
            CheckResult::report("c2.peclet_min", pe_min),
            CheckResult::report("c2.peclet_max", pe_max),
            CheckResult::at_most("c2.beta_gamma_max_ulps", worst_ulps as f64, 1.0),
            CheckResult::at_most("c2.assembled_row_rel_diff", worst_rel, 1e-11),
        ])
    })())
}

fn galerkin_pathology_checks() -> Vec<CheckResult> {
    collect("c3", (|| {
        let mesh = unit_mesh(10)?;
        let problem = model_problem(100.0)?;
        let g = nodal_exactness(&problem, &mesh, Formulation::Galerkin)?;
        let mut out = vec![
            CheckResult::report("c3.peclet", g.peclet),
            CheckResult::at_least("c3.galerkin_max_nodal_error", g.max_error, 1e-2),
            CheckResult::at_least("c3.galerkin_sign_alternation", g.oscillation_fraction(), 0.7),
        ];
        for f in [Formulation::ArtificialDiffusion, Formulation::WeightedVariational] {
            let e = nodal_exactness(&problem, &mesh, f)?;
            out.push(CheckResult::at_most(format!("c3.max_nodal_error.{f}"), e.max_error, 1e-10));
        }
        Ok(out)
    })())
}

/// `v(x) = 1 + x`, `k = 1`, `f = 1` on the unit interval.
pub fn variable_velocity_problem() -> Result<Problem> {
    let spec = ProblemSpec::new(Field::variable(|x| 1.0 + x), 1.0, 1.0, Interval::UNIT);
    validate(spec, BoundaryConditions::homogeneous_dirichlet())
}

fn symmetry_checks() -> Vec<CheckResult> {
    collect("c4", (|| {
        let w = Formulation::WeightedVariational;
        let mut cases: Vec<(String, Problem, usize)> = Vec::new();
        for ratio in ACCEPTANCE_RATIOS {
            cases.push((format!("ratio={ratio}.n=10"), model_problem(ratio)?, 10));
        }
        for ratio in [1.0, 10.0, 100.0] {
            cases.push((format!("ratio={ratio}.n=20"), model_problem(ratio)?, 20));
        }
        for n in [8, 16, 32, 64] {
            cases.push((format!("ratio=10.n={n}"), model_problem(10.0)?, n));
        }
        cases.push(("variable_velocity.n=10".into(), variable_velocity_problem()?, 10));
        cases.push(("variable_velocity.n=40".into(), variable_velocity_problem()?, 40));

        let mut out = Vec::new();
        for (name, problem, n) in &cases {
            let r = vainberg_symmetry(problem, &unit_mesh(*n)?, w)?;
            out.push(CheckResult::at_most(format!("c4.weighted_asymmetry.{name}"), r.asymmetry, 1e-12));
        }
        for v in [0.5, 1.0, 10.0] {
            let problem = Problem::model(v, 1.0, 1.0)?;
            let r = vainberg_symmetry(&problem, &unit_mesh(10)?, Formulation::Galerkin)?;
            out.push(CheckResult::at_most(
                format!("c4.galerkin_asymmetry_minus_v.v={v}"),
                (r.max_abs_asymmetry - v.abs()).abs(),
                1e-13,
            ));
        }
        Ok(out)
    })())
}

fn stationarity_checks() -> Vec<CheckResult> {
    collect("c5", (|| {
        let mesh = unit_mesh(20)?;
        let mut out = Vec::new();
        for ratio in [1.0, 10.0, 100.0] {
            let problem = model_problem(ratio)?;
            let sol = solve(&problem, &mesh, Formulation::WeightedVariational)?;
            let i = functional_value(&problem, &mesh, &sol.values)?;
            let d = stationarity_check(&problem, &mesh, &sol.values)?;
            out.push(CheckResult::at_most(format!("c5.max_directional_derivative.ratio={ratio}"), d, 1e-8 * i.abs() + 1e-10));
        }
        Ok(out)
    })())
}

fn special_function_checks() -> Vec<CheckResult> {
    let points = 100;
    let (lo, hi) = (1e-8f64.ln(), 30f64.ln());
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let x = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
        let reference = oracle::cothm(x);
        worst = worst.max(((cothm(x) - reference) / reference).abs());
    }
    // Dimensionless forms: kbar/k = Pe cothm(Pe), (k + kbar)/(vh/2) = coth(Pe).
    let (v, h) = (1.0, 0.1);
    let k_small = v * h / (2.0 * 1e-6);
    let k_large = v * h / (2.0 * 50.0);
    vec![
        CheckResult::at_most("c6.cothm_max_rel_error", worst, 1e-15),
        CheckResult::at_most("c6.kbar_over_k.pe=1e-6", kbar(v, k_small, h) / k_small, 1e-12),
        CheckResult::at_most(
            "c6.total_diffusion_over_upwind_minus_one.pe=50",
            ((k_large + kbar(v, k_large, h)) / (0.5 * v * h) - 1.0).abs(),
            1e-12,
        ),
    ]
}

fn convergence_checks() -> Vec<CheckResult> {
    collect("c7", (|| {
        let sizes = [8, 16, 32, 64];
        let mut out = Vec::new();
        for (ratio, f) in [(1.0, Formulation::Galerkin), (10.0, Formulation::WeightedVariational)] {
            let r = convergence_study(&model_problem(ratio)?, f, &sizes)?;
            for (i, rate) in r.rates.iter().enumerate() {
                let pair = format!("{}-{}", sizes[i], sizes[i + 1]);
                out.push(CheckResult::at_most(format!("c7.l2_rate_deviation.{f}.ratio={ratio}.n={pair}"), (rate - 2.0).abs(), 0.15));
            }
        }
        Ok(out)
    })())
}

fn random_dominant_system(rng: &mut ChaCha8Rng, n: usize) -> TriDiagSystem {
    let sub: Vec<f64> = (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sup: Vec<f64> = (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let off = if i > 0 { sub[i - 1].abs() } else { 0.0 } + if i + 1 < n { sup[i].abs() } else { 0.0 };
            let margin = rng.gen_range(0.1..1.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * (off + margin)
        })
        .collect();
    let rhs = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TriDiagSystem::new(sub, diag, sup, rhs).expect("consistent lengths")
}

fn oracle_checks(seed: u64) -> Vec<CheckResult> {
    collect("c8", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut worst_solve: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.gen_range(1..=50);
            let sys = random_dominant_system(&mut rng, n);
            let x = thomas(&sys)?;
            let reference = oracle::dense_solve(sys.to_dense(), sys.rhs.clone())?;
            let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = x.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst_solve = worst_solve.max(err / scale);
        }

        let mut worst_quad: f64 = 0.0;
        for _ in 0..50 {
            let len = rng.gen_range(0.01..1.0);
            let z = log_uniform(&mut rng, 1e-6, 10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let a = z / len;
            let x0 = rng.gen_range(0.0..(2.0f64).min(50.0 / a.abs()));
            let degree = rng.gen_range(0..=3);
            let poly: Vec<f64> = (0..=degree).map(|_| rng.gen_range(0.0..1.0)).collect();
            let got = integrate_exp_poly(a, &poly, x0, x0 + len);
            let reference = oracle::exp_poly_integral(a, &poly, x0, x0 + len);
            worst_quad = worst_quad.max(((got - reference) / reference).abs());
        }
        Ok(vec![
            CheckResult::at_most("c8.thomas_vs_dense_rel_error", worst_solve, 1e-12),
            CheckResult::at_most("c8.exp_poly_vs_closed_form_rel_error", worst_quad, 1e-13),
        ])
    })())
}

/// `κ₁` of the weighted operator at `v/k = 100`, `h = 0.1`, before and
/// after symmetric diagonal scaling. Boundary rows are replaced by identity
/// rows so only the interior operator is measured.
pub fn conditioning_pair() -> Result<(f64, f64)> {
    let problem = model_problem(100.0)?;
    let mesh = unit_mesh(10)?;
    let f = Formulation::WeightedVariational;
    let last = mesh.n_nodes() - 1;
    let raw = assemble(&problem, &mesh, f)?.apply_dirichlet(0, 0.0)?.apply_dirichlet(last, 0.0)?;
    let scaled = assemble_symmetric_scaled(&problem, &mesh, f)?.apply_dirichlet(0, 0.0)?.apply_dirichlet(last, 0.0)?;
    Ok((condition_estimate(&raw)?, condition_estimate(&scaled)?))
}

fn conditioning_checks() -> Vec<CheckResult> {
    collect("c9", (|| {
        let (raw, scaled) = conditioning_pair()?;
        Ok(vec![
            CheckResult::report("c9.kappa1_unequilibrated", raw),
            CheckResult::report("c9.kappa1_symmetric_scaled", scaled),
            CheckResult::at_least("c9.kappa1_ratio", raw / scaled, 1e3),
        ])
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_distance() {
        assert_eq!(ulps_apart(1.0, 1.0), 0);
        assert_eq!(ulps_apart(1.0, f64::from_bits(1.0f64.to_bits() + 1)), 1);
        assert_eq!(ulps_apart(0.0, -0.0), 0);
        assert_eq!(ulps_apart(-1.0, f64::from_bits((-1.0f64).to_bits() + 2)), 2);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(0, DEFAULT_SEED).is_none());
        assert!(run_criterion(10, DEFAULT_SEED).is_none());
    }

    #[test]
    fn failed_checks_carry_the_error() {
        let c = collect("cx", Err(Error::TooFewElements(1)));
        assert_eq!(c.len(), 1);
        assert!(!c[0].pass);
        assert!(c[0].check.starts_with("cx: "));
    }
}

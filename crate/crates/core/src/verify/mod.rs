//! Measurements behind the claims about the three formulations: nodal
//! exactness, symmetry of the discrete operator, stationarity of the
//! weighted functional, reflection symmetry and convergence rates.

pub mod oracle;
pub mod suite;

use serde::Serialize;

use crate::assembly::{assemble, Formulation};
use crate::mesh::{build_uniform, Mesh1D};
use crate::problem::{validate, BoundaryConditions, End, Field, Interval, Problem, ProblemSpec, WeightFunction};
use crate::quadrature::{gauss_rule, integrate_exp_poly_local, points_for_peclet};
use crate::solve::solve;
use crate::stencils::exact_solution;
use crate::{Error, Result};

/// Gauss points per element for L2 errors.
const L2_POINTS: usize = 8;

/// The model problem on the unit interval with `v/k = ratio`, `f = 1`,
/// homogeneous Dirichlet data. Uses `v = 1, k = 1/ratio` so the solution is
/// of order one for every ratio; `ratio = 0` gives `v = 0, k = 1`.
pub fn model_problem(ratio: f64) -> Result<Problem> {
    if ratio == 0.0 {
        Problem::model(0.0, 1.0, 1.0)
    } else {
        Problem::model(ratio.signum(), 1.0 / ratio.abs(), 1.0)
    }
}

/// `(v, k, f)` when the closed-form solution applies to `problem`.
pub fn exact_oracle(problem: &Problem) -> Result<(f64, f64, f64)> {
    let (v, k, f) = problem.constants().ok_or(Error::NotConstantCoefficient)?;
    if problem.domain() != Interval::UNIT {
        return Err(Error::OracleUnavailable("domain is not the unit interval"));
    }
    if *problem.bcs() != BoundaryConditions::homogeneous_dirichlet() {
        return Err(Error::OracleUnavailable("boundary data is not homogeneous Dirichlet"));
    }
    Ok((v, k, f))
}

/// `u_j - u(x_j)` for every node.
pub fn nodal_errors(problem: &Problem, mesh: &Mesh1D, values: &[f64]) -> Result<Vec<f64>> {
    let (v, k, f) = exact_oracle(problem)?;
    Ok(mesh.nodes().iter().zip(values).map(|(&x, &u)| u - exact_solution(v, k, f, x)).collect())
}

/// Fraction of consecutive interior-node pairs whose errors have opposite signs.
pub fn oscillation_fraction(errors: &[f64]) -> f64 {
    if errors.len() < 4 {
        return 0.0;
    }
    let interior = &errors[1..errors.len() - 1];
    let flips = interior.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    flips as f64 / (interior.len() - 1) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessEntry {
    pub ratio: f64,
    pub peclet: f64,
    pub formulation: Formulation,
    pub max_error: f64,
    pub nodal_errors: Vec<f64>,
}

impl ExactnessEntry {
    pub fn oscillation_fraction(&self) -> f64 {
        oscillation_fraction(&self.nodal_errors)
    }
}

/// Maximum nodal error of `formulation` against the closed-form solution.
pub fn nodal_exactness(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<ExactnessEntry> {
    let (v, k, _) = exact_oracle(problem)?;
    let sol = solve(problem, mesh, formulation)?;
    let nodal_errors = nodal_errors(problem, mesh, &sol.values)?;
    let max_error = nodal_errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let (x0, h) = mesh.element_span(0)?;
    Ok(ExactnessEntry {
        ratio: v / k,
        peclet: problem.peclet_element(x0, h),
        formulation,
        max_error,
        nodal_errors,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessRecord {
    pub entry: ExactnessEntry,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    pub records: Vec<ExactnessRecord>,
}

impl ExactnessReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

/// One record per `(ratio, formulation)` on the uniform mesh with `n` elements.
pub fn exactness_sweep(ratios: &[f64], n: usize, formulations: &[Formulation], tolerance: f64) -> Result<ExactnessReport> {
    let mesh = build_uniform(Interval::UNIT, n)?;
    let mut records = Vec::new();
    for &ratio in ratios {
        let problem = model_problem(ratio)?;
        for &f in formulations {
            let entry = nodal_exactness(&problem, &mesh, f)?;
            let pass = entry.max_error <= tolerance;
            records.push(ExactnessRecord { entry, tolerance, pass });
        }
    }
    Ok(ExactnessReport { records })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub formulation: Formulation,
    /// `max |sub - sup|`
    pub max_abs_asymmetry: f64,
    /// `max |sub - sup|` over the largest absolute row sum.
    pub asymmetry: f64,
    pub summary: String,
}

/// Symmetry of the assembled operator before boundary conditions and
/// equilibration. For a bilinear form this is the discrete form of the
/// potential-existence condition.
pub fn vainberg_symmetry(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<SymmetryReport> {
    let sys = assemble(problem, mesh, formulation)?;
    let summary = match problem.constants() {
        Some((v, k, f)) => format!("v={v} k={k} f={f} n={}", mesh.n_elements()),
        None => format!("variable coefficients, n={}", mesh.n_elements()),
    };
    Ok(SymmetryReport {
        formulation,
        max_abs_asymmetry: sys.max_abs_asymmetry(),
        asymmetry: sys.relative_asymmetry(),
        summary,
    })
}

/// `∫ α (k u'^2 / 2 - u f)` over one element for linear `u`.
fn element_energy(problem: &Problem, weight: &WeightFunction, x0: f64, h: f64, ul: f64, ur: f64) -> f64 {
    let slope = (ur - ul) / h;
    let ln_left = weight.ln_alpha(x0);
    let spec = problem.spec();
    if let (Some(a), Some(k), Some(f)) =
        (weight.linear_rate(), spec.diffusivity.as_constant(), spec.forcing.as_constant())
    {
        // u(x0 + t) = ul + slope t
        let e0 = integrate_exp_poly_local(a, &[1.0], h);
        let eu = integrate_exp_poly_local(a, &[ul, slope], h);
        ln_left.exp() * (0.5 * k * slope * slope * e0 - f * eu)
    } else {
        let n = (points_for_peclet(problem.peclet_element(x0, h)) + 4).min(64);
        let rule = gauss_rule(n).expect("point count within range");
        rule.integrate(x0, x0 + h, |x| {
            let u = ul + slope * (x - x0);
            weight.alpha_at(x) * (0.5 * problem.k(x) * slope * slope - u * problem.f(x))
        })
    }
}

/// `I(u) = ∫ α (k u'^2 / 2 - u f) dx - Σ_Neumann α u t^p` for the piecewise
/// linear `u` with the given nodal values.
pub fn functional_value(problem: &Problem, mesh: &Mesh1D, values: &[f64]) -> Result<f64> {
    let weight = WeightFunction::for_problem(problem, mesh);
    functional_value_with_weight(problem, mesh, &weight, values)
}

pub fn functional_value_with_weight(
    problem: &Problem,
    mesh: &Mesh1D,
    weight: &WeightFunction,
    values: &[f64],
) -> Result<f64> {
    if values.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch(format!("{} values for {} nodes", values.len(), mesh.n_nodes())));
    }
    let mut total = 0.0;
    for (e, (x0, h)) in mesh.elements().enumerate() {
        total += element_energy(problem, weight, x0, h, values[e], values[e + 1]);
    }
    let dom = problem.domain();
    for (end, x, u) in [(End::Left, dom.lo, values[0]), (End::Right, dom.hi, values[values.len() - 1])] {
        let bc = problem.bcs().at(end);
        if !bc.is_dirichlet() {
            total -= weight.alpha_at(x) * u * bc.value;
        }
    }
    Ok(total)
}

/// Largest central-difference directional derivative of `I` at `values`
/// along the interior hat functions. Only the two elements supporting a hat
/// change, so only their energies are differenced.
pub fn stationarity_check(problem: &Problem, mesh: &Mesh1D, values: &[f64]) -> Result<f64> {
    if values.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch(format!("{} values for {} nodes", values.len(), mesh.n_nodes())));
    }
    let weight = WeightFunction::for_problem(problem, mesh);
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = (1e-6 * norm).max(1e-9);
    let nodes = mesh.nodes();
    let local = |j: usize, uj: f64| -> f64 {
        let left = element_energy(problem, &weight, nodes[j - 1], nodes[j] - nodes[j - 1], values[j - 1], uj);
        let right = element_energy(problem, &weight, nodes[j], nodes[j + 1] - nodes[j], uj, values[j + 1]);
        left + right
    };
    let mut worst: f64 = 0.0;
    for j in 1..nodes.len() - 1 {
        let d = (local(j, values[j] + eps) - local(j, values[j] - eps)) / (2.0 * eps);
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// `‖u_h - u‖_{L2}` of the piecewise-linear interpolant of `values` against
/// the closed-form solution.
pub fn l2_error(problem: &Problem, mesh: &Mesh1D, values: &[f64]) -> Result<f64> {
    let (v, k, f) = exact_oracle(problem)?;
    let rule = gauss_rule(L2_POINTS)?;
    let mut sum = 0.0;
    for (e, (x0, h)) in mesh.elements().enumerate() {
        let (ul, ur) = (values[e], values[e + 1]);
        sum += rule.integrate(x0, x0 + h, |x| {
            let uh = ul + (ur - ul) * (x - x0) / h;
            let d = uh - exact_solution(v, k, f, x);
            d * d
        });
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub formulation: Formulation,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`
    pub rates: Vec<f64>,
}

/// L2 errors on uniform meshes with the given (strictly increasing) element counts.
pub fn convergence_study(problem: &Problem, formulation: Formulation, sizes: &[usize]) -> Result<ConvergenceReport> {
    exact_oracle(problem)?;
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMesh("mesh sizes must be strictly increasing".into()));
    }
    let mut h = Vec::new();
    let mut errors = Vec::new();
    for &n in sizes {
        let mesh = build_uniform(problem.domain(), n)?;
        let sol = solve(problem, &mesh, formulation)?;
        h.push(problem.domain().len() / n as f64);
        errors.push(l2_error(problem, &mesh, &sol.values)?);
    }
    let rates = errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(ConvergenceReport { formulation, h, errors, rates })
}

/// The problem reflected by `x -> lo + hi - x`: velocity changes sign and
/// the boundary data swap ends.
pub fn mirrored_problem(problem: &Problem) -> Result<Problem> {
    let spec = problem.spec();
    let Interval { lo, hi } = problem.domain();
    let reflect = |field: &Field, sign: f64| -> Field {
        match field {
            Field::Constant(c) => Field::Constant(sign * c),
            Field::Variable(g) => {
                let g = g.clone();
                Field::variable(move |x| sign * g(lo + hi - x))
            }
        }
    };
    let mirrored = ProblemSpec {
        velocity: reflect(&spec.velocity, -1.0),
        diffusivity: reflect(&spec.diffusivity, 1.0),
        forcing: reflect(&spec.forcing, 1.0),
        domain: spec.domain,
    };
    let bcs = BoundaryConditions::new(problem.bcs().right, problem.bcs().left);
    validate(mirrored, bcs)
}

/// `max_j |u_j - u~_{n-j}|` between the solution of `problem` and that of
/// its mirror image on the mirrored mesh.
pub fn mirror_check(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<f64> {
    let mirrored = mirrored_problem(problem)?;
    let a = solve(problem, mesh, formulation)?;
    let b = solve(&mirrored, &mesh.mirrored(), formulation)?;
    Ok(a.values.iter().zip(b.values.iter().rev()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

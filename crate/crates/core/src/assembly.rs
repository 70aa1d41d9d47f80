//! Global tridiagonal systems for the three formulations.
//!
//! Every formulation is assembled from per-element data: a 2x2 element
//! matrix, the consistent load and the (weighted) lumped mass, all expressed
//! relative to a per-element log scale. For the weighted formulation that
//! scale is `ln α(x_left)`, so the element integrals only involve
//! `exp(a t)` with `|a t| <= |a| h`. The global system can then be produced
//! raw, row-equilibrated by the lumped mass, or symmetrically scaled, without
//! forming `α` values that leave the `f64` range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh1D;
use crate::problem::{End, Problem, WeightFunction};
use crate::quadrature::{gauss_rule, integrate_exp_poly_local, points_for_peclet};
use crate::stencils::kbar;
use crate::{Error, Result};

/// `ln α` below which raw weighted entries would leave the normal range.
const MIN_RAW_LN_ALPHA: f64 = -690.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Galerkin,
    #[serde(rename = "artificial")]
    ArtificialDiffusion,
    #[serde(rename = "weighted")]
    WeightedVariational,
}

impl Formulation {
    pub const ALL: [Formulation; 3] =
        [Formulation::Galerkin, Formulation::ArtificialDiffusion, Formulation::WeightedVariational];

    /// Short name used in CLI flags and column headers.
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Galerkin => "galerkin",
            Formulation::ArtificialDiffusion => "artificial",
            Formulation::WeightedVariational => "weighted",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "galerkin" => Ok(Formulation::Galerkin),
            "artificial" | "artificial-diffusion" | "optimal" => Ok(Formulation::ArtificialDiffusion),
            "weighted" | "weighted-variational" | "variational" => Ok(Formulation::WeightedVariational),
            other => Err(format!("unknown formulation '{other}' (expected galerkin, artificial or weighted)")),
        }
    }
}

/// Tridiagonal matrix with right-hand side.
///
/// Row `i` reads `sub[i-1] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
    pub symmetric_hint: bool,
    pub formulation: Option<Formulation>,
    /// Factor multiplying a Neumann flux in the rhs of the first and last rows.
    pub end_weights: [f64; 2],
}

impl TriDiagSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "sub {}, diag {}, sup {}, rhs {}",
                sub.len(),
                n,
                sup.len(),
                rhs.len()
            )));
        }
        let mut sys = TriDiagSystem {
            sub,
            diag,
            sup,
            rhs,
            symmetric_hint: false,
            formulation: None,
            end_weights: [1.0, 1.0],
        };
        sys.symmetric_hint = sys.max_abs_asymmetry() <= 1e-12 * sys.inf_norm();
        Ok(sys)
    }

    fn zeros(n: usize) -> Self {
        TriDiagSystem {
            sub: vec![0.0; n - 1],
            diag: vec![0.0; n],
            sup: vec![0.0; n - 1],
            rhs: vec![0.0; n],
            symmetric_hint: false,
            formulation: None,
            end_weights: [1.0, 1.0],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// `(sub, diag, sup)` of row `i`, with zeros outside the band.
    pub fn row(&self, i: usize) -> [f64; 3] {
        let l = if i > 0 { self.sub[i - 1] } else { 0.0 };
        let r = if i + 1 < self.n() { self.sup[i] } else { 0.0 };
        [l, self.diag[i], r]
    }

    /// `max_i Σ_j |a_ij|`
    pub fn inf_norm(&self) -> f64 {
        (0..self.n())
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max_j Σ_i |a_ij|`
    pub fn one_norm(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| {
                let above = if j > 0 { self.sup[j - 1].abs() } else { 0.0 };
                let below = if j + 1 < n { self.sub[j].abs() } else { 0.0 };
                above + self.diag[j].abs() + below
            })
            .fold(0.0, f64::max)
    }

    /// `max_i |a_{i+1,i} - a_{i,i+1}|`
    pub fn max_abs_asymmetry(&self) -> f64 {
        self.sub.iter().zip(&self.sup).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Asymmetry relative to the largest row magnitude.
    pub fn relative_asymmetry(&self) -> f64 {
        let norm = self.inf_norm();
        if norm == 0.0 {
            0.0
        } else {
            self.max_abs_asymmetry() / norm
        }
    }

    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let [l, d, r] = self.row(i);
                let mut s = d * u[i];
                if i > 0 {
                    s += l * u[i - 1];
                }
                if i + 1 < self.n() {
                    s += r * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// `max_i |(A u - b)_i|`
    pub fn residual_inf(&self, u: &[f64]) -> f64 {
        self.matvec(u).iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Row-major dense copy of the matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i > 0 {
                a[i][i - 1] = self.sub[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = self.sup[i];
            }
        }
        a
    }

    /// Divides row `i` (matrix and rhs) by `scales[i]`. The solution is unchanged.
    pub fn row_equilibrate(mut self, scales: &[f64]) -> Result<Self> {
        let n = self.n();
        check_scales(scales, n)?;
        for i in 0..n {
            let s = scales[i];
            self.diag[i] /= s;
            self.rhs[i] /= s;
            if i > 0 {
                self.sub[i - 1] /= s;
            }
            if i + 1 < n {
                self.sup[i] /= s;
            }
        }
        self.end_weights[0] /= scales[0];
        self.end_weights[1] /= scales[n - 1];
        self.symmetric_hint = self.symmetric_hint && scales.iter().all(|&s| s == scales[0]);
        Ok(self)
    }

    /// `D A D y = D b` with `D = diag(scales)^(-1/2)`; the unknown becomes
    /// `y = sqrt(scales) * u`. Symmetry is preserved.
    pub fn symmetric_scale(mut self, scales: &[f64]) -> Result<Self> {
        let n = self.n();
        check_scales(scales, n)?;
        let d: Vec<f64> = scales.iter().map(|s| 1.0 / s.sqrt()).collect();
        for i in 0..n {
            self.diag[i] *= d[i] * d[i];
            self.rhs[i] *= d[i];
        }
        for i in 0..n - 1 {
            self.sup[i] *= d[i] * d[i + 1];
            self.sub[i] *= d[i + 1] * d[i];
        }
        self.end_weights[0] *= d[0];
        self.end_weights[1] *= d[n - 1];
        Ok(self)
    }

    /// Symmetric elimination of a known end value: the column entry moves to
    /// the rhs of the neighbouring row and the end row becomes `u = value`.
    pub fn apply_dirichlet(mut self, node: usize, value: f64) -> Result<Self> {
        let n = self.n();
        if node == 0 {
            if n > 1 {
                self.rhs[1] -= self.sub[0] * value;
                self.sub[0] = 0.0;
                self.sup[0] = 0.0;
            }
        } else if node == n - 1 {
            self.rhs[n - 2] -= self.sup[n - 2] * value;
            self.sup[n - 2] = 0.0;
            self.sub[n - 2] = 0.0;
        } else {
            return Err(Error::InteriorDirichletUnsupported(node));
        }
        self.diag[node] = 1.0;
        self.rhs[node] = value;
        Ok(self)
    }

    /// Adds the boundary flux term for `end`, which must carry a Neumann condition.
    pub fn apply_neumann(mut self, problem: &Problem, end: End, t_p: f64) -> Result<Self> {
        if problem.bcs().at(end).is_dirichlet() {
            return Err(Error::EndHasDirichlet);
        }
        let (node, w) = match end {
            End::Left => (0, self.end_weights[0]),
            End::Right => (self.n() - 1, self.end_weights[1]),
        };
        self.rhs[node] += w * t_p;
        Ok(self)
    }
}

fn check_scales(scales: &[f64], n: usize) -> Result<()> {
    if scales.len() != n {
        return Err(Error::DimensionMismatch(format!("{} scales for {} rows", scales.len(), n)));
    }
    if let Some((row, &scale)) = scales.iter().enumerate().find(|(_, s)| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::NonPositiveScale { row, scale });
    }
    Ok(())
}

/// Element contribution relative to `exp(ln_scale)`.
#[derive(Debug, Clone, Copy)]
struct ElementData {
    ln_scale: f64,
    /// `matrix[i][j]`: test function `i`, trial function `j`.
    matrix: [[f64; 2]; 2],
    load: [f64; 2],
    mass: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scaling {
    Raw,
    Row,
    Symmetric,
}

fn check_mesh(problem: &Problem, mesh: &Mesh1D) -> Result<()> {
    let p = problem.domain();
    let m = mesh.domain();
    let tol = 1e-14 * p.len().max(p.lo.abs()).max(p.hi.abs());
    if (p.lo - m.lo).abs() > tol || (p.hi - m.hi).abs() > tol {
        return Err(Error::MeshProblemMismatch { mesh: (m.lo, m.hi), problem: (p.lo, p.hi) });
    }
    Ok(())
}

fn stiffness_pattern(c: f64) -> [[f64; 2]; 2] {
    [[c, -c], [-c, c]]
}

/// Galerkin element, optionally with `kbar` added to the diffusivity.
fn galerkin_element(problem: &Problem, x0: f64, h: f64, artificial: bool) -> ElementData {
    let pe = problem.peclet_element(x0, h);
    let (adv, diff_int, load) = match problem.constants() {
        Some((v, k, f)) => ([0.5 * v, 0.5 * v], k * h, [0.5 * f * h; 2]),
        None => {
            let rule = gauss_rule(points_for_peclet(pe)).expect("point count within range");
            let x1 = x0 + h;
            let n0 = |x: f64| (x1 - x) / h;
            let n1 = |x: f64| (x - x0) / h;
            let adv0 = rule.integrate(x0, x1, |x| n0(x) * problem.v(x));
            let adv1 = rule.integrate(x0, x1, |x| n1(x) * problem.v(x));
            let diff = rule.integrate(x0, x1, |x| problem.k(x));
            let l0 = rule.integrate(x0, x1, |x| n0(x) * problem.f(x));
            let l1 = rule.integrate(x0, x1, |x| n1(x) * problem.f(x));
            ([adv0 / h, adv1 / h], diff, [l0, l1])
        }
    };
    let mut diff = diff_int / (h * h);
    if artificial {
        let mid = x0 + 0.5 * h;
        diff += kbar(problem.v(mid), problem.k(mid), h) / h;
    }
    // ∫ N_i v N_j' with N' = (-1/h, 1/h), ∫ k N_i' N_j'
    let matrix = [[-adv[0] + diff, adv[0] - diff], [-adv[1] - diff, adv[1] + diff]];
    ElementData { ln_scale: 0.0, matrix, load, mass: [0.5 * h; 2] }
}

/// Weighted element integrals divided by `α(x_left)`.
fn weighted_element(problem: &Problem, weight: &WeightFunction, ln_left: f64, x0: f64, h: f64) -> ElementData {
    let k_const = problem.spec().diffusivity.as_constant();
    let f_const = problem.spec().forcing.as_constant();
    let (stiff, mass, load) = match (weight.linear_rate(), k_const) {
        (Some(a), Some(k)) => {
            let e0 = integrate_exp_poly_local(a, &[1.0], h);
            let m0 = integrate_exp_poly_local(a, &[1.0, -1.0 / h], h);
            let m1 = integrate_exp_poly_local(a, &[0.0, 1.0 / h], h);
            let load = match f_const {
                Some(f) => [f * m0, f * m1],
                None => {
                    let rule = gauss_rule(points_for_peclet(a * h / 2.0)).expect("point count within range");
                    let l0 = rule.integrate(0.0, h, |t| (a * t).exp() * (1.0 - t / h) * problem.f(x0 + t));
                    let l1 = rule.integrate(0.0, h, |t| (a * t).exp() * (t / h) * problem.f(x0 + t));
                    [l0, l1]
                }
            };
            (k * e0 / (h * h), [m0, m1], load)
        }
        _ => {
            let pe = problem.peclet_element(x0, h);
            let rule = gauss_rule(points_for_peclet(pe)).expect("point count within range");
            let x1 = x0 + h;
            let rel = |x: f64| (weight.ln_alpha(x) - ln_left).exp();
            let stiff = rule.integrate(x0, x1, |x| rel(x) * problem.k(x)) / (h * h);
            let m0 = rule.integrate(x0, x1, |x| rel(x) * (x1 - x) / h);
            let m1 = rule.integrate(x0, x1, |x| rel(x) * (x - x0) / h);
            let l0 = rule.integrate(x0, x1, |x| rel(x) * (x1 - x) / h * problem.f(x));
            let l1 = rule.integrate(x0, x1, |x| rel(x) * (x - x0) / h * problem.f(x));
            (stiff, [m0, m1], [l0, l1])
        }
    };
    ElementData { ln_scale: ln_left, matrix: stiffness_pattern(stiff), load, mass }
}

struct ElementSet {
    elements: Vec<ElementData>,
    /// `ln α` at the nodes (zeros for the unweighted formulations).
    node_ln_alpha: Vec<f64>,
    formulation: Formulation,
    symmetric: bool,
}

fn element_set(
    problem: &Problem,
    mesh: &Mesh1D,
    formulation: Formulation,
    weight: Option<&WeightFunction>,
) -> Result<ElementSet> {
    check_mesh(problem, mesh)?;
    let set = match formulation {
        Formulation::Galerkin | Formulation::ArtificialDiffusion => {
            let artificial = formulation == Formulation::ArtificialDiffusion;
            ElementSet {
                elements: mesh.elements().map(|(x0, h)| galerkin_element(problem, x0, h, artificial)).collect(),
                node_ln_alpha: vec![0.0; mesh.n_nodes()],
                formulation,
                symmetric: formulation == Formulation::Galerkin && problem.velocity_vanishes(),
            }
        }
        Formulation::WeightedVariational => {
            let owned;
            let weight = match weight {
                Some(w) => w,
                None => {
                    owned = WeightFunction::for_problem(problem, mesh);
                    &owned
                }
            };
            let node_ln_alpha = weight.ln_alpha_nodes(mesh.nodes());
            let elements = mesh
                .elements()
                .zip(&node_ln_alpha)
                .map(|((x0, h), &ln)| weighted_element(problem, weight, ln, x0, h))
                .collect();
            ElementSet { elements, node_ln_alpha, formulation, symmetric: true }
        }
    };
    Ok(set)
}

impl ElementSet {
    /// `(ln reference, local mass)` per node: the lumped mass is
    /// `exp(reference) * local`.
    fn node_masses(&self) -> Vec<(f64, f64)> {
        let n_el = self.elements.len();
        (0..=n_el)
            .map(|j| {
                let left = (j > 0).then(|| &self.elements[j - 1]);
                let right = (j < n_el).then(|| &self.elements[j]);
                let reference = left
                    .map(|e| e.ln_scale)
                    .into_iter()
                    .chain(right.map(|e| e.ln_scale))
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut m = 0.0;
                if let Some(e) = left {
                    m += (e.ln_scale - reference).exp() * e.mass[1];
                }
                if let Some(e) = right {
                    m += (e.ln_scale - reference).exp() * e.mass[0];
                }
                (reference, m)
            })
            .collect()
    }

    fn build(&self, scaling: Scaling) -> Result<TriDiagSystem> {
        let n = self.elements.len() + 1;
        let masses = self.node_masses();
        let ln_mass: Vec<f64> = masses.iter().map(|(r, m)| r + m.ln()).collect();
        if scaling == Scaling::Raw {
            let min = self.node_ln_alpha.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < MIN_RAW_LN_ALPHA {
                return Err(Error::WeightUnderflow { min_log_alpha: min });
            }
        }
        // Factor applied to the part of row `row` coming from an element with
        // log scale `ln`, and the matching column factor.
        let row_factor = |row: usize, ln: f64| -> f64 {
            match scaling {
                Scaling::Raw => ln.exp(),
                Scaling::Row => (ln - masses[row].0).exp() / masses[row].1,
                Scaling::Symmetric => (ln - 0.5 * ln_mass[row]).exp(),
            }
        };
        let col_factor = |col: usize| -> f64 {
            match scaling {
                Scaling::Symmetric => (-0.5 * ln_mass[col]).exp(),
                _ => 1.0,
            }
        };
        let mut sys = TriDiagSystem::zeros(n);
        for (e, el) in self.elements.iter().enumerate() {
            for local in 0..2 {
                let row = e + local;
                let rf = row_factor(row, el.ln_scale);
                let cf_self = col_factor(row);
                let other = e + 1 - local;
                let cf_other = col_factor(other);
                sys.diag[row] += rf * el.matrix[local][local] * cf_self;
                let off = rf * el.matrix[local][1 - local] * cf_other;
                if local == 0 {
                    sys.sup[e] += off;
                } else {
                    sys.sub[e] += off;
                }
                sys.rhs[row] += rf * el.load[local];
            }
        }
        let end_weight = |node: usize| -> f64 {
            let ln = self.node_ln_alpha[node];
            match scaling {
                Scaling::Raw => ln.exp(),
                Scaling::Row => (ln - masses[node].0).exp() / masses[node].1,
                Scaling::Symmetric => (ln - 0.5 * ln_mass[node]).exp(),
            }
        };
        sys.end_weights = [end_weight(0), end_weight(n - 1)];
        sys.formulation = Some(self.formulation);
        sys.symmetric_hint = self.symmetric && scaling != Scaling::Row;
        Ok(sys)
    }

    fn lumped_mass(&self) -> Vec<f64> {
        self.node_masses().iter().map(|(r, m)| r.exp() * m).collect()
    }
}

/// Raw global system before boundary conditions.
///
/// Galerkin rows contain `∫ w v u' + ∫ w' k u'` and `∫ w f`; artificial
/// diffusion adds `kbar` per element to `k`; weighted rows contain
/// `∫ α k w' u'` and `∫ α w f`.
pub fn assemble(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<TriDiagSystem> {
    element_set(problem, mesh, formulation, None)?.build(Scaling::Raw)
}

/// Raw weighted system with an explicit weight function.
pub fn assemble_weighted(problem: &Problem, mesh: &Mesh1D, weight: &WeightFunction) -> Result<TriDiagSystem> {
    element_set(problem, mesh, Formulation::WeightedVariational, Some(weight))?.build(Scaling::Raw)
}

/// Lumped masses `∫ μ N_j dx` with `μ = α` for the weighted formulation and
/// `μ = 1` otherwise.
pub fn lumped_mass(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<Vec<f64>> {
    Ok(element_set(problem, mesh, formulation, None)?.lumped_mass())
}

/// System with every row divided by its lumped mass, evaluated without
/// forming raw weight values. Interior rows are the difference equations
/// `c_l u_{j-1} + c_c u_j + c_r u_{j+1} = f`.
pub fn assemble_equilibrated(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<TriDiagSystem> {
    element_set(problem, mesh, formulation, None)?.build(Scaling::Row)
}

pub fn assemble_equilibrated_weighted(
    problem: &Problem,
    mesh: &Mesh1D,
    weight: &WeightFunction,
) -> Result<TriDiagSystem> {
    element_set(problem, mesh, Formulation::WeightedVariational, Some(weight))?.build(Scaling::Row)
}

/// `D A D` with `D = diag(lumped mass)^(-1/2)`, evaluated in log space.
pub fn assemble_symmetric_scaled(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<TriDiagSystem> {
    element_set(problem, mesh, formulation, None)?.build(Scaling::Symmetric)
}

/// Applies Neumann fluxes, then eliminates Dirichlet ends.
pub fn apply_boundary_conditions(mut sys: TriDiagSystem, problem: &Problem) -> Result<TriDiagSystem> {
    let n = sys.n();
    for end in [End::Left, End::Right] {
        let bc = problem.bcs().at(end);
        if !bc.is_dirichlet() {
            sys = sys.apply_neumann(problem, end, bc.value)?;
        }
    }
    for (end, node) in [(End::Left, 0), (End::Right, n - 1)] {
        let bc = problem.bcs().at(end);
        if bc.is_dirichlet() {
            sys = sys.apply_dirichlet(node, bc.value)?;
        }
    }
    Ok(sys)
}

/// The row-equilibrated system with boundary conditions, ready to solve.
pub fn discretize(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<TriDiagSystem> {
    apply_boundary_conditions(assemble_equilibrated(problem, mesh, formulation)?, problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform;
    use crate::problem::{validate, BoundaryCondition, BoundaryConditions, Field, Interval, ProblemSpec};
    use crate::stencils::{gamma_stencil, optimal_stencil};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_mesh(n: usize) -> Mesh1D {
        build_uniform(Interval::UNIT, n).unwrap()
    }

    fn rel_row_diff(row: [f64; 3], s: [f64; 3]) -> f64 {
        let scale = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        row.iter().zip(s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn poisson_galerkin_rows() {
        let p = Problem::model(0.0, 1.0, 1.0).unwrap();
        let sys = assemble(&p, &unit_mesh(4), Formulation::Galerkin).unwrap();
        for j in 1..4 {
            assert_eq!(sys.row(j), [-4.0, 8.0, -4.0]);
            assert_eq!(sys.rhs[j], 0.25);
        }
        assert!(sys.symmetric_hint);
    }

    #[test]
    fn galerkin_asymmetry_is_velocity() {
        for &v in &[0.5, 1.0, 10.0, -2.0] {
            let p = Problem::model(v, 0.05, 1.0).unwrap();
            let sys = assemble(&p, &unit_mesh(10), Formulation::Galerkin).unwrap();
            assert!(!sys.symmetric_hint);
            for (a, b) in sys.sub.iter().zip(&sys.sup) {
                assert!((a - b + v).abs() <= 1e-13, "v={v}");
            }
        }
    }

    #[test]
    fn weighted_rows_reproduce_gamma() {
        let (v, k, n) = (1.0, 0.02, 10);
        let p = Problem::model(v, k, 1.0).unwrap();
        let mesh = unit_mesh(n);
        let raw = assemble(&p, &mesh, Formulation::WeightedVariational).unwrap();
        assert!(raw.symmetric_hint);
        assert_eq!(raw.max_abs_asymmetry(), 0.0);
        let m = lumped_mass(&p, &mesh, Formulation::WeightedVariational).unwrap();
        let eq = raw.row_equilibrate(&m).unwrap();
        let g = gamma_stencil(v, k, 0.1).as_array();
        for j in 1..n {
            assert!(rel_row_diff(eq.row(j), g) <= 1e-11, "row {j}: {:?} vs {g:?}", eq.row(j));
            assert_relative_eq!(eq.rhs[j], 1.0, max_relative = 1e-12);
        }
        let direct = assemble_equilibrated(&p, &mesh, Formulation::WeightedVariational).unwrap();
        for j in 0..=n {
            assert!(rel_row_diff(direct.row(j), eq.row(j)) <= 1e-12);
        }
    }

    #[test]
    fn artificial_rows_reproduce_optimal() {
        let (v, k) = (1.0, 0.02);
        let p = Problem::model(v, k, 1.0).unwrap();
        let sys = assemble_equilibrated(&p, &unit_mesh(10), Formulation::ArtificialDiffusion).unwrap();
        let b = optimal_stencil(v, k, 0.1).as_array();
        for j in 1..10 {
            assert!(rel_row_diff(sys.row(j), b) <= 1e-13);
        }
    }

    #[test]
    fn artificial_is_galerkin_with_augmented_k() {
        let (v, k, h) = (3.0, 0.04, 0.1);
        let p = Problem::model(v, k, 1.0).unwrap();
        let q = Problem::model(v, k + kbar(v, k, h), 1.0).unwrap();
        let a = assemble(&p, &unit_mesh(10), Formulation::ArtificialDiffusion).unwrap();
        let g = assemble(&q, &unit_mesh(10), Formulation::Galerkin).unwrap();
        for j in 0..11 {
            assert!(rel_row_diff(a.row(j), g.row(j)) <= 1e-13);
        }
    }

    #[test]
    fn large_ratio_equilibrated_is_finite() {
        let p = Problem::model(1.0, 1e-3, 1.0).unwrap();
        let mesh = unit_mesh(10);
        assert!(matches!(
            assemble(&p, &mesh, Formulation::WeightedVariational),
            Err(Error::WeightUnderflow { .. })
        ));
        let sys = assemble_equilibrated(&p, &mesh, Formulation::WeightedVariational).unwrap();
        let g = gamma_stencil(1.0, 1e-3, 0.1).as_array();
        assert!(rel_row_diff(sys.row(5), g) <= 1e-11);
        assert!(sys.diag.iter().chain(&sys.rhs).all(|x| x.is_finite()));
    }

    #[test]
    fn mesh_mismatch() {
        let p = Problem::model(1.0, 1.0, 1.0).unwrap();
        let mesh = build_uniform(Interval::new(0.0, 2.0), 4).unwrap();
        assert!(matches!(assemble(&p, &mesh, Formulation::Galerkin), Err(Error::MeshProblemMismatch { .. })));
    }

    #[test]
    fn dirichlet_elimination() {
        let sys = TriDiagSystem::new(vec![-4.0, -4.0], vec![8.0, 8.0, 8.0], vec![-4.0, -4.0], vec![1.0, 1.0, 1.0]).unwrap();
        let out = sys.clone().apply_dirichlet(0, 2.0).unwrap();
        assert_eq!(out.rhs[1], 9.0);
        assert_eq!(out.row(0), [0.0, 1.0, 0.0]);
        assert_eq!(out.rhs[0], 2.0);
        assert!(out.symmetric_hint);
        assert_eq!(out.max_abs_asymmetry(), 0.0);

        let zero = sys.clone().apply_dirichlet(0, 0.0).unwrap().apply_dirichlet(2, 0.0).unwrap();
        assert_eq!(zero.rhs, vec![0.0, 1.0, 0.0]);
        assert_eq!(sys.apply_dirichlet(1, 0.0), Err(Error::InteriorDirichletUnsupported(1)));
    }

    #[test]
    fn neumann_terms() {
        let bcs = BoundaryConditions::new(BoundaryCondition::dirichlet(0.0), BoundaryCondition::neumann(1.0));
        let p = validate(ProblemSpec::constant(1.0, 1.0, 1.0), bcs).unwrap();
        let mesh = unit_mesh(10);

        let w = assemble(&p, &mesh, Formulation::WeightedVariational).unwrap();
        let before = w.rhs[10];
        let after = w.apply_neumann(&p, End::Right, 1.0).unwrap().rhs[10];
        assert_relative_eq!(after - before, 0.36787944117144233, max_relative = 1e-12);

        let g = assemble(&p, &mesh, Formulation::Galerkin).unwrap();
        let before = g.rhs[10];
        let g = g.apply_neumann(&p, End::Right, 1.0).unwrap();
        assert_relative_eq!(g.rhs[10] - before, 1.0, max_relative = 1e-15);
        let unchanged = g.clone().apply_neumann(&p, End::Right, 0.0).unwrap();
        assert_eq!(unchanged, g);
        assert_eq!(g.apply_neumann(&p, End::Left, 1.0), Err(Error::EndHasDirichlet));
    }

    #[test]
    fn row_equilibration_errors_and_identity() {
        let sys = TriDiagSystem::new(vec![-1.0], vec![2.0, 2.0], vec![-1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(sys.clone().row_equilibrate(&[1.0, 1.0]).unwrap(), sys);
        assert_eq!(
            sys.clone().row_equilibrate(&[1.0, 0.0]),
            Err(Error::NonPositiveScale { row: 1, scale: 0.0 })
        );
        assert!(matches!(sys.row_equilibrate(&[1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn variable_coefficient_weighted_symmetric() {
        let spec = ProblemSpec::new(Field::variable(|x| 1.0 + x), 1.0, 1.0, Interval::UNIT);
        let p = validate(spec, BoundaryConditions::homogeneous_dirichlet()).unwrap();
        let sys = assemble(&p, &unit_mesh(16), Formulation::WeightedVariational).unwrap();
        assert!(sys.relative_asymmetry() <= 1e-12);
        let g = assemble(&p, &unit_mesh(16), Formulation::Galerkin).unwrap();
        assert!(g.relative_asymmetry() > 1e-3);
    }

    #[test]
    fn symmetric_scaling_preserves_symmetry() {
        let p = Problem::model(1.0, 0.01, 1.0).unwrap();
        let mesh = unit_mesh(10);
        let sys = assemble_symmetric_scaled(&p, &mesh, Formulation::WeightedVariational).unwrap();
        assert!(sys.symmetric_hint);
        assert!(sys.relative_asymmetry() <= 1e-14);
        let raw = assemble(&p, &mesh, Formulation::WeightedVariational).unwrap();
        let m = lumped_mass(&p, &mesh, Formulation::WeightedVariational).unwrap();
        let manual = raw.symmetric_scale(&m).unwrap();
        for j in 0..11 {
            assert!(rel_row_diff(sys.row(j), manual.row(j)) <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn stencil_reproduction(log_pe in -3.0f64..20f64.log10(), k in 1e-2f64..10.0, n in 3usize..12) {
            let h = 1.0 / n as f64;
            let v = 10f64.powf(log_pe) * 2.0 * k / h;
            let p = Problem::model(v, k, 1.0).unwrap();
            let sys = assemble_equilibrated(&p, &unit_mesh(n), Formulation::WeightedVariational).unwrap();
            let g = gamma_stencil(v, k, h).as_array();
            for j in 1..n {
                prop_assert!(rel_row_diff(sys.row(j), g) <= 1e-11);
            }
        }
    }
}

//! Direct tridiagonal solves and conditioning diagnostics.

use crate::assembly::{discretize, Formulation, TriDiagSystem};
use crate::mesh::Mesh1D;
use crate::problem::Problem;
use crate::{Error, Result};

/// Pivots smaller than this in magnitude are treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Largest system accepted by [`condition_estimate`].
pub const MAX_CONDITION_SIZE: usize = 100_000;

/// Nodal values with the residual of the system they solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSolution {
    pub values: Vec<f64>,
    pub formulation: Option<Formulation>,
    /// `max_i |(A u - b)_i|`
    pub residual_inf: f64,
    pub mesh: Option<Mesh1D>,
}

impl NodalSolution {
    pub fn nodes(&self) -> Option<&[f64]> {
        self.mesh.as_ref().map(|m| m.nodes())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Thomas algorithm without pivoting: forward elimination, back substitution.
pub fn thomas(sys: &TriDiagSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = sys.diag[0];
    if !(pivot.abs() > PIVOT_FLOOR) {
        return Err(Error::ZeroPivot { row: 0 });
    }
    if n > 1 {
        c[0] = sys.sup[0] / pivot;
    }
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        let l = sys.sub[i - 1];
        pivot = sys.diag[i] - l * c[i - 1];
        if !(pivot.abs() > PIVOT_FLOOR) {
            return Err(Error::ZeroPivot { row: i });
        }
        if i + 1 < n {
            c[i] = sys.sup[i] / pivot;
        }
        d[i] = (sys.rhs[i] - l * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves `sys` and records the residual.
pub fn thomas_solve(sys: &TriDiagSystem) -> Result<NodalSolution> {
    let values = thomas(sys)?;
    let residual_inf = sys.residual_inf(&values);
    Ok(NodalSolution { values, formulation: sys.formulation, residual_inf, mesh: None })
}

/// Assembles with boundary conditions and solves.
pub fn solve(problem: &Problem, mesh: &Mesh1D, formulation: Formulation) -> Result<NodalSolution> {
    let sys = discretize(problem, mesh, formulation)?;
    let mut sol = thomas_solve(&sys)?;
    sol.mesh = Some(mesh.clone());
    Ok(sol)
}

/// `κ₁ = ‖A‖₁ ‖A⁻¹‖₁`, with `‖A⁻¹‖₁` computed from the `n` columns of the inverse.
pub fn condition_estimate(sys: &TriDiagSystem) -> Result<f64> {
    let n = sys.n();
    if n > MAX_CONDITION_SIZE {
        return Err(Error::SystemTooLarge(n));
    }
    let mut unit = sys.clone();
    let mut inv_norm: f64 = 0.0;
    for j in 0..n {
        unit.rhs.iter_mut().for_each(|x| *x = 0.0);
        unit.rhs[j] = 1.0;
        let col = thomas(&unit)?;
        inv_norm = inv_norm.max(col.iter().map(|x| x.abs()).sum());
    }
    Ok(sys.one_norm() * inv_norm)
}

/// `true` when `residual_inf <= tol (‖A‖∞ ‖u‖∞ + ‖b‖∞)`.
pub fn backward_stable(sys: &TriDiagSystem, sol: &NodalSolution, tol: f64) -> bool {
    let b = sys.rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    sol.residual_inf <= tol * (sys.inf_norm() * sol.max_abs() + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform;
    use crate::problem::Interval;
    use approx::assert_relative_eq;

    fn system(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> TriDiagSystem {
        TriDiagSystem::new(sub.to_vec(), diag.to_vec(), sup.to_vec(), rhs.to_vec()).unwrap()
    }

    #[test]
    fn identity() {
        let sys = system(&[0.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 0.0], &[3.0, -1.0, 2.0]);
        let sol = thomas_solve(&sys).unwrap();
        assert_eq!(sol.values, vec![3.0, -1.0, 2.0]);
        assert_eq!(sol.residual_inf, 0.0);
        assert_eq!(condition_estimate(&sys).unwrap(), 1.0);
    }

    #[test]
    fn second_difference() {
        let sys = system(&[-1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0], &[1.0, 0.0, 0.0]);
        let u = thomas(&sys).unwrap();
        for (a, b) in u.iter().zip([0.75, 0.5, 0.25]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn diagonal_condition() {
        let sys = system(&[0.0], &[1.0, 10.0], &[0.0], &[0.0, 0.0]);
        assert_relative_eq!(condition_estimate(&sys).unwrap(), 10.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_pivot_reported() {
        let sys = system(&[1.0], &[1.0, 1.0], &[1.0], &[0.0, 0.0]);
        assert_eq!(thomas(&sys), Err(Error::ZeroPivot { row: 1 }));
        let sys = system(&[1.0], &[0.0, 1.0], &[1.0], &[0.0, 0.0]);
        assert_eq!(thomas(&sys), Err(Error::ZeroPivot { row: 0 }));
    }

    #[test]
    fn poisson_is_nodally_exact() {
        let p = Problem::model(0.0, 1.0, 1.0).unwrap();
        let mesh = build_uniform(Interval::UNIT, 10).unwrap();
        for f in Formulation::ALL {
            let sol = solve(&p, &mesh, f).unwrap();
            for (&x, &u) in mesh.nodes().iter().zip(&sol.values) {
                assert!((u - x * (1.0 - x) / 2.0).abs() <= 1e-14, "{f}: {u} at {x}");
            }
        }
    }

    #[test]
    fn single_row() {
        let sys = TriDiagSystem::new(vec![], vec![4.0], vec![], vec![2.0]).unwrap();
        assert_eq!(thomas(&sys).unwrap(), vec![0.5]);
    }
}

//! Symmetry of the assembled operators before boundary conditions. The
//! Galerkin matrix is skew by |v| off the diagonal; the weighted one is
//! symmetric, so it is the Hessian of a functional.

use std::sync::Arc;

use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::problem::validate;
use weighted_advdiff::verify::vainberg_symmetry;
use weighted_advdiff::{BoundaryConditions, Field, Formulation, Interval, Problem, ProblemSpec};

fn main() -> weighted_advdiff::Result<()> {
    let mesh = build_uniform(Interval::UNIT, 10)?;
    let variable = validate(
        ProblemSpec::new(Field::Variable(Arc::new(|x| 1.0 + x)), 1.0, 1.0, Interval::UNIT),
        BoundaryConditions::homogeneous_dirichlet(),
    )?;
    let cases = [
        Problem::model(0.5, 1.0, 1.0)?,
        Problem::model(10.0, 1.0, 1.0)?,
        Problem::model(0.0, 1.0, 1.0)?,
        variable,
    ];
    for p in &cases {
        for f in [Formulation::Galerkin, Formulation::WeightedVariational] {
            let r = vainberg_symmetry(p, &mesh, f)?;
            println!("{:<28} {:>9}  max|a_ij - a_ji| = {:.3e}  relative = {:.3e}", r.summary, f.to_string(), r.max_abs_asymmetry, r.asymmetry);
        }
    }
    Ok(())
}

//! Galerkin against the exact solution at increasing v/k on h = 0.1.
//! Above Pe = 1 the nodal error alternates in sign from node to node.

use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::verify::{model_problem, nodal_exactness};
use weighted_advdiff::{Formulation, Interval};

fn main() -> weighted_advdiff::Result<()> {
    let mesh = build_uniform(Interval::UNIT, 10)?;
    for ratio in [1.0, 10.0, 50.0, 100.0] {
        let problem = model_problem(ratio)?;
        let e = nodal_exactness(&problem, &mesh, Formulation::Galerkin)?;
        println!(
            "v/k = {ratio:>5}  Pe = {:>5.2}  max error = {:.3e}  sign changes = {:.0}%",
            e.peclet,
            e.max_error,
            100.0 * e.oscillation_fraction()
        );
    }

    println!("\nv/k = 100, nodal values:");
    let problem = model_problem(100.0)?;
    let sol = weighted_advdiff::solve(&problem, &mesh, Formulation::Galerkin)?;
    let (v, k, f) = problem.constants().expect("constant coefficients");
    for (x, u) in mesh.nodes().iter().zip(&sol.values) {
        let exact = weighted_advdiff::stencils::exact_solution(v, k, f, *x);
        println!("  x = {x:.1}  u_h = {u:>9.5}  u = {exact:>9.5}");
    }
    Ok(())
}

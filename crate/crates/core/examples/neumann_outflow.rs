//! A prescribed diffusive flux at the outflow end. The weighted
//! formulation carries the flux with the weight at the boundary.

use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::problem::validate;
use weighted_advdiff::{solve, BoundaryCondition, BoundaryConditions, Formulation, Interval, ProblemSpec};

fn main() -> weighted_advdiff::Result<()> {
    let (v, k, f, t) = (5.0, 1.0, 1.0, -0.1);
    let bcs = BoundaryConditions::new(BoundaryCondition::dirichlet(0.0), BoundaryCondition::neumann(t));
    let problem = validate(ProblemSpec::constant(v, k, f), bcs)?;

    // u = A (e^{r x} - 1) + x / v with r = v/k and k u'(1) = t.
    let r = v / k;
    let a = (t / k - 1.0 / v) / (r * r.exp());
    let exact = |x: f64| a * (r * x).exp_m1() + x / v;

    for n in [10, 40] {
        let mesh = build_uniform(Interval::UNIT, n)?;
        println!("n = {n}");
        for form in Formulation::ALL {
            let sol = solve(&problem, &mesh, form)?;
            let err = mesh.nodes().iter().zip(&sol.values).map(|(x, u)| (u - exact(*x)).abs()).fold(0.0, f64::max);
            println!("  {:<10} u(1) = {:.8}  max nodal error = {err:.3e}", form.to_string(), sol.values[n]);
        }
    }
    println!("exact u(1) = {:.8}", exact(1.0));
    Ok(())
}

//! The weighted discrete solution is the minimizer of
//! I(u) = ∫ α (k u'^2 / 2 - u f) over the finite-element space.

use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::verify::{functional_value, model_problem, stationarity_check};
use weighted_advdiff::{solve, Formulation, Interval};

fn main() -> weighted_advdiff::Result<()> {
    let mesh = build_uniform(Interval::UNIT, 20)?;
    for ratio in [1.0, 10.0, 100.0] {
        let problem = model_problem(ratio)?;
        println!("v/k = {ratio}");
        for f in Formulation::ALL {
            let sol = solve(&problem, &mesh, f)?;
            let i = functional_value(&problem, &mesh, &sol.values)?;
            let d = stationarity_check(&problem, &mesh, &sol.values)?;
            println!("  {:<10} I = {i:>+.10e}  max |dI/dw_j| = {d:.3e}", f.to_string());
        }
    }
    Ok(())
}

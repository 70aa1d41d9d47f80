//! A velocity varying along the domain. The weight function is built from
//! the cumulative integral of v/k and the resulting matrix stays symmetric.

use weighted_advdiff::mesh::build_uniform;
use weighted_advdiff::problem::validate;
use weighted_advdiff::verify::vainberg_symmetry;
use weighted_advdiff::{solve, BoundaryConditions, Field, Formulation, Interval, ProblemSpec, WeightFunction};

fn main() -> weighted_advdiff::Result<()> {
    let spec = ProblemSpec::new(Field::variable(|x| 20.0 * (1.0 + x)), Field::variable(|x| 1.0 + 0.5 * x), 1.0, Interval::UNIT);
    let problem = validate(spec, BoundaryConditions::homogeneous_dirichlet())?;
    let coarse = build_uniform(Interval::UNIT, 10)?;
    let fine = build_uniform(Interval::UNIT, 640)?;

    let weight = WeightFunction::for_problem(&problem, &coarse);
    let sym = vainberg_symmetry(&problem, &coarse, Formulation::WeightedVariational)?;
    println!("weighted relative asymmetry: {:.2e}", sym.asymmetry);

    let reference = solve(&problem, &fine, Formulation::WeightedVariational)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}", "x", "ln alpha", "galerkin", "artificial", "weighted", "fine");
    let sols: Vec<_> = Formulation::ALL.iter().map(|&f| solve(&problem, &coarse, f)).collect::<Result<_, _>>()?;
    for (j, x) in coarse.nodes().iter().enumerate() {
        println!(
            "{x:>5.2} {:>10.4} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            weight.ln_alpha(*x),
            sols[0].values[j],
            sols[1].values[j],
            sols[2].values[j],
            reference.values[64 * j]
        );
    }
    Ok(())
}

//! The weighted variational and optimal artificial diffusion solutions
//! agree with the exact solution at every node for any Péclet number.

use weighted_advdiff::verify::{exactness_sweep, suite::ACCEPTANCE_RATIOS};
use weighted_advdiff::Formulation;

fn main() -> weighted_advdiff::Result<()> {
    let report = exactness_sweep(&ACCEPTANCE_RATIOS, 10, &Formulation::ALL, 1e-10)?;
    println!("{:>6} {:>6} {:>11} {:>12}", "v/k", "Pe", "formulation", "max error");
    for r in &report.records {
        let e = &r.entry;
        println!("{:>6} {:>6.2} {:>11} {:>12.3e}", e.ratio, e.peclet, e.formulation.to_string(), e.max_error);
    }
    Ok(())
}

//! L2 error under mesh refinement.

use weighted_advdiff::verify::{convergence_study, model_problem};
use weighted_advdiff::Formulation;

fn main() -> weighted_advdiff::Result<()> {
    let sizes = [8, 16, 32, 64, 128];
    for (ratio, f) in [
        (1.0, Formulation::Galerkin),
        (10.0, Formulation::WeightedVariational),
        (10.0, Formulation::ArtificialDiffusion),
        (100.0, Formulation::WeightedVariational),
    ] {
        let r = convergence_study(&model_problem(ratio)?, f, &sizes)?;
        println!("{f} v/k = {ratio}");
        for (i, (h, e)) in r.h.iter().zip(&r.errors).enumerate() {
            let rate = if i == 0 { String::new() } else { format!("rate {:.3}", r.rates[i - 1]) };
            println!("  h = {h:<9.6} L2 = {e:.4e}  {rate}");
        }
    }
    Ok(())
}

//! Interior difference equations: closed-form versus assembled rows, and
//! the coincidence of the optimal-diffusion and weighted stencils.

use weighted_advdiff::cli::stencil_rows;
use weighted_advdiff::stencils::{gamma_stencil, optimal_stencil};
use weighted_advdiff::Formulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (v, k, n) = (1.0, 0.02, 10);
    println!("v = {v}, k = {k}, h = {}", 1.0 / n as f64);
    for r in stencil_rows(v, k, n, &Formulation::ALL)? {
        println!(
            "{:>10} {:>11}  ({:>12.8}, {:>12.8}, {:>12.8})",
            r.formulation.to_string(),
            r.source,
            r.left,
            r.center,
            r.right
        );
    }

    println!("\nmax |beta - gamma| / max|beta| over Pe:");
    for pe in [1e-3, 0.1, 1.0, 2.5, 10.0, 20.0] {
        let h = 0.1;
        let v = 2.0 * pe / h;
        let (b, g) = (optimal_stencil(v, 1.0, h), gamma_stencil(v, 1.0, h));
        println!("  Pe = {pe:>6}  {:.2e}", b.rel_diff(&g));
    }
    Ok(())
}

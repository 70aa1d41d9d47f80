use weighted_advdiff::verify::suite::{run_all, DEFAULT_SEED};

fn main() {
    for report in run_all(DEFAULT_SEED) {
        println!("criterion {} ({:.3}s): {}", report.id, report.elapsed.as_secs_f64(), report.title);
        for c in &report.checks {
            println!("  [{}] {} = {:.6e} (tol {:e})", if c.pass { "PASS" } else { "FAIL" }, c.check, c.value, c.tolerance);
        }
    }
}

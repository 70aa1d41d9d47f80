//! Acceptance criteria, one `[PASS]` or `[FAIL]` line each followed by the
//! individual measurements. Runs without the libtest harness so the lines
//! are always printed; exits nonzero if any criterion fails.

use weighted_advdiff::verify::suite::{run_criterion, runtime_limit, CriterionReport, Relation, DEFAULT_SEED};

fn check(id: u8) -> bool {
    let report: CriterionReport = run_criterion(id, DEFAULT_SEED).expect("known criterion");
    let secs = report.elapsed.as_secs_f64();
    let within_time = runtime_limit(id).map_or(true, |limit| secs < limit);
    let pass = report.pass() && within_time;
    let budget = runtime_limit(id).map_or("none".to_string(), |l| format!("{l}s"));
    println!(
        "[{}] criterion {id}: {} ({} checks, {} failing, {secs:.3}s, budget {budget})",
        if pass { "PASS" } else { "FAIL" },
        report.title,
        report.checks.len(),
        report.failures()
    );
    for c in &report.checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Report => "reported",
        };
        let tol = if c.relation == Relation::Report { String::new() } else { format!("{:e}", c.tolerance) };
        println!("    {} {} = {:e} {rel} {tol}", if c.pass { "ok  " } else { "FAIL" }, c.check, c.value);
    }
    pass
}

fn main() {
    let failed: Vec<u8> = (1..=9).filter(|&id| !check(id)).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

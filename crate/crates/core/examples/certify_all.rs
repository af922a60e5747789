//! Prints the full diagnostics report of every built-in problem.

fn main() -> Result<(), hcopt::Error> {
    for p in hcopt::problems::default_instances()? {
        let report = hcopt::diagnostics::certify(&p, &hcopt::diagnostics::DiagnosticsConfig::default(), 0);
        print!("{}", report.render());
    }
    Ok(())
}

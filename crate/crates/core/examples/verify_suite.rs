//! Run every verification suite on a preset and print the records.

use pcf_harmonic::harness::{verify_suite, Status, Suite, SuiteConfig};
use pcf_harmonic::Result;

fn main() -> Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sierpinski".into());
    let level = std::env::args().nth(2).and_then(|m| m.parse().ok()).unwrap_or(4);
    let cfg = SuiteConfig::preset(&name, level)?;
    let report = verify_suite(Suite::All, &cfg)?;
    for r in &report.records {
        let value = r.value.map(|v| format!("{v:.3e}")).unwrap_or_default();
        let reason = r.reason.as_deref().unwrap_or("");
        println!("{:5} {:32} {value:>11} {reason}", format!("{:?}", r.status), r.id);
    }
    println!(
        "{name} m={level}: {} pass, {} fail, {} skip",
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skip)
    );
    Ok(())
}

//! Run a registered experiment at reduced size and write its report to a directory.
//!
//! `cargo run --example verify_report -- OUT_DIR`

use parasite_branching::harness::{emit_report, find_experiment, run_experiment, Overrides};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "report-example".into());
    let spec = find_experiment("mean-ldcg")?.with_overrides(&Overrides { reps: Some(2_000), ..Default::default() });
    let result = run_experiment(&spec)?;
    for c in &result.cells {
        println!("{:<10} t={:?}: {:.4} ± {:.4} vs {:.4} -> {}", c.label, c.t, c.estimate.mean, c.estimate.se, c.reference, if c.pass { "pass" } else { "fail" });
    }
    let files = emit_report(&[result], out.as_ref())?;
    println!("wrote {} and {}", files.csv.display(), files.json.display());
    Ok(())
}

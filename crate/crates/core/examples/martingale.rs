//! The stopped process Y^{1−a}·exp(∫G_a(Y)) has constant mean; print the table.

use parasite_branching::auxiliary::martingale_diagnostic;
use parasite_branching::dynamics::IntegratorConfig;
use parasite_branching::harness::find_preset;
use parasite_branching::rng::StreamSource;

fn main() -> anyhow::Result<()> {
    let preset = find_preset("diffusive-generic")?;
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let table = martingale_diagnostic(0.5, 1.0, 0.1, 10.0, &[0.0, 0.25, 0.5, 1.0], &preset.spec, 4_000, &cfg, &StreamSource::new(2, "martingale"))?;
    println!("a = {}, target mean {:.4}", table.a, table.reference);
    for r in &table.rows {
        println!("  t = {:<5} mean {:.4} ± {:.4}  stopped {:.3}", r.t, r.estimate.mean, r.estimate.se, r.stopped);
    }
    println!("worst deviation: {:.2} SE", table.worst_z());
    Ok(())
}

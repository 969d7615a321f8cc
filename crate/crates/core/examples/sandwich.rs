//! Couple the time-inhomogeneous spine with its lower and upper comparison processes
//! and count how often the ordering breaks.

use parasite_branching::auxiliary::sandwich_summary;
use parasite_branching::dynamics::IntegratorConfig;
use parasite_branching::harness::find_preset;

fn main() -> anyhow::Result<()> {
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    for name in ["ldcg", "ldcg-plus-plus"] {
        let preset = find_preset(name)?;
        let s = sandwich_summary(preset.x0, 1.0, &preset.spec, &cfg, 500, 7, "sandwich-example")?;
        println!(
            "{name:<16} ordered {}/{} (upper bound broken on {}), worst gap {:.3e}",
            s.ordered_replicates(),
            s.replicates,
            s.bar_violating_replicates,
            s.worst_gap
        );
    }
    Ok(())
}

//! Sample one path of each auxiliary process from the same starting load.

use parasite_branching::auxiliary::{simulate_spine, SpineVariant};
use parasite_branching::dynamics::IntegratorConfig;
use parasite_branching::harness::find_preset;
use parasite_branching::rng::StreamSource;

fn main() -> anyhow::Result<()> {
    let preset = find_preset("ldcg")?;
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let horizon = 1.0;
    let variants = [
        SpineVariant::Uniform,
        SpineVariant::Weighted { alpha: 0.5 },
        SpineVariant::Inhomogeneous { horizon },
    ];
    let source = StreamSource::new(5, "spines");
    println!("{:<28} {:>8} {:>8} {:>8} {:>8}", "variant", "t=0.25", "t=0.5", "t=0.75", "t=1");
    for (i, v) in variants.into_iter().enumerate() {
        let path = simulate_spine(v, preset.x0, horizon, &preset.spec, &cfg, &mut source.stream(i as u64))?;
        let at: Vec<String> = [0.25, 0.5, 0.75, 1.0].iter().map(|&t| format!("{:>8.3}", path.value_at(t))).collect();
        println!("{:<28} {}", path.variant.label(), at.join(" "));
    }
    Ok(())
}

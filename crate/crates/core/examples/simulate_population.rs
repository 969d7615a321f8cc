//! Grow one population from a single infected cell and print its statistics over time,
//! then estimate E[N_t] over many replicates.

use parasite_branching::dynamics::IntegratorConfig;
use parasite_branching::harness::find_preset;
use parasite_branching::population::{sample_functionals_mc, simulate_population, Functional, PopulationCaps};
use parasite_branching::rng::{seeded, StreamSource};

fn main() -> anyhow::Result<()> {
    let preset = find_preset("ldcg")?;
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let times = [0.25, 0.5, 1.0, 1.5];
    let run = simulate_population(preset.x0, 1.5, &preset.spec, &cfg, &PopulationCaps::default(), &times, &[1.0, 5.0], &mut seeded(3))?;
    println!("one realisation of `{}`:", preset.name);
    for s in &run.samples {
        println!("  t = {:<5} N = {:<4} total load = {:<10.3} share with load <= 1: {:.3}", s.time, s.n, s.total_parasites, s.prop_leq_k[0]);
    }

    let mc = sample_functionals_mc(
        &preset.spec,
        preset.x0,
        &times,
        &[Functional::Count, Functional::Sum(parasite_branching::model::FunctionSpec::linear(1.0))],
        2_000,
        &cfg,
        &PopulationCaps::default(),
        &StreamSource::new(3, "example"),
    )?;
    println!("over 2000 replicates:");
    for (i, t) in times.iter().enumerate() {
        let (n, load) = (mc.estimate(i, 0), mc.estimate(i, 1));
        println!("  t = {t:<5} E[N_t] = {:.3} ± {:.3}   E[total load] = {:.3} ± {:.3}", n.mean, n.se, load.mean, load.se);
    }
    Ok(())
}

//! Replace a division rate r(x)·l(θ) by r(x)·∫l dκ with the kernel reweighted by l.

use parasite_branching::auxiliary::{kernel_change, Weight};
use parasite_branching::model::KernelSpec;
use parasite_branching::rng::seeded;

fn main() -> anyhow::Result<()> {
    let kappa = KernelSpec::Uniform;
    for l in [Weight::One, Weight::Power { alpha: 2.0, scale: 1.0 }, Weight::Custom(std::sync::Arc::new(|t: f64| 1.0 + (t - 0.5).abs()))] {
        let change = kernel_change(&l, &kappa)?;
        let mut rng = seeded(1);
        let draws: Vec<f64> = (0..100_000).map(|_| change.law.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let spread = draws.iter().map(|t| (t - 0.5).abs()).sum::<f64>() / draws.len() as f64;
        println!("{l:?}: rate scale {:.4}, sample mean {mean:.4}, mean |θ − 1/2| {spread:.4}", change.rate_scale);
    }
    Ok(())
}

//! Trading a θ-dependent division rate r(x)l(θ) for the rate r(x)∫l dκ with a reweighted kernel.

use std::fmt;
use std::sync::Arc;

use crate::model::{KernelSpec, SplitLaw};
use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};

/// Weight l on (0,1) multiplying the division rate.
#[derive(Clone)]
pub enum Weight {
    One,
    /// l(θ) = scale·θ^α
    Power { alpha: f64, scale: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => f.write_str("One"),
            Weight::Power { alpha, scale } => write!(f, "Power({scale}·θ^{alpha})"),
            Weight::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Weight {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Power { alpha, scale } => scale * theta.powf(*alpha),
            Weight::Custom(l) => l(theta),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelChange {
    /// ∫ l dκ
    pub rate_scale: f64,
    /// κ̂(dθ) = l(θ)κ(dθ)/∫l dκ
    pub law: SplitLaw,
}

/// Cells of the tabulated inverse CDF for custom weights on continuous kernels.
const TABLE_CELLS: usize = 2000;

pub fn kernel_change(l: &Weight, kappa: &KernelSpec) -> Result<KernelChange> {
    match l {
        Weight::One => Ok(KernelChange { rate_scale: 1.0, law: kappa.as_split_law() }),
        Weight::Power { alpha, scale } => {
            if !(*scale > 0.0) {
                return Err(Error::Domain(format!("weight scale must be positive, got {scale}")));
            }
            let m = kappa.moment(*alpha)?;
            Ok(KernelChange { rate_scale: scale * m, law: kappa.tilted(*alpha)? })
        }
        Weight::Custom(f) => match kappa {
            KernelSpec::DiracHalf => {
                let w = f(0.5);
                positive(w)?;
                Ok(KernelChange { rate_scale: w, law: SplitLaw::Point(0.5) })
            }
            KernelSpec::Atoms(atoms) => {
                let z: f64 = atoms.iter().map(|&(t, w)| w * f(t)).sum();
                positive(z)?;
                let law = atoms.iter().map(|&(t, w)| (t, w * f(t) / z)).collect();
                Ok(KernelChange { rate_scale: z, law: SplitLaw::Atoms(law) })
            }
            _ => tabulate(f.as_ref(), kappa),
        },
    }
}

fn positive(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence(format!("∫ l dκ = {z} is not a positive finite number")))
    }
}

fn tabulate(f: &(dyn Fn(f64) -> f64 + Send + Sync), kappa: &KernelSpec) -> Result<KernelChange> {
    let density = |t: f64| f(t) * kappa.density(t).unwrap_or(0.0);
    let tol = Tolerance::default();
    let mut cdf = Vec::with_capacity(TABLE_CELLS + 1);
    cdf.push((0.0, 0.0));
    let mut acc = 0.0;
    for i in 0..TABLE_CELLS {
        let (a, b) = (i as f64 / TABLE_CELLS as f64, (i + 1) as f64 / TABLE_CELLS as f64);
        acc += integrate(density, a, b, tol)?;
        cdf.push((b, acc));
    }
    positive(acc)?;
    for c in cdf.iter_mut() {
        c.1 /= acc;
    }
    Ok(KernelChange { rate_scale: acc, law: SplitLaw::Tabulated(Arc::new(cdf)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn unit_weight_is_identity() {
        let kc = kernel_change(&Weight::One, &KernelSpec::Uniform).unwrap();
        assert_eq!(kc.rate_scale, 1.0);
    }

    #[test]
    fn doubled_identity_weight_has_unit_mass_for_symmetric_kernels() {
        let w = Weight::Power { alpha: 1.0, scale: 2.0 };
        for k in [KernelSpec::DiracHalf, KernelSpec::Uniform, KernelSpec::SymmetricBeta(3.0)] {
            let kc = kernel_change(&w, &k).unwrap();
            assert!((kc.rate_scale - 1.0).abs() < 1e-12, "{k}: {}", kc.rate_scale);
        }
    }

    #[test]
    fn power_weight_on_halving_kernel() {
        let kc = kernel_change(&Weight::Power { alpha: 1.7, scale: 1.0 }, &KernelSpec::DiracHalf).unwrap();
        assert!((kc.rate_scale - 2f64.powf(-1.7)).abs() < 1e-15);
        assert!(matches!(kc.law, SplitLaw::Point(t) if t == 0.5));
    }

    #[test]
    fn tabulated_custom_weight_matches_the_tilt() {
        // l(θ) = θ on the uniform kernel gives density 2θ: mean 2/3.
        let kc = kernel_change(&Weight::Custom(Arc::new(|t| t)), &KernelSpec::Uniform).unwrap();
        assert!((kc.rate_scale - 0.5).abs() < 1e-9);
        let mut rng = seeded(3);
        let n = 40_000;
        let mean = (0..n).map(|_| kc.law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn divergent_weight_is_rejected() {
        let w = Weight::Power { alpha: -1.5, scale: 1.0 };
        assert!(kernel_change(&w, &KernelSpec::Uniform).is_err());
    }
}

//! Partition kernels κ: the law of the fraction Θ inherited by one daughter.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    DiracHalf,
    /// Beta(λ, λ)
    SymmetricBeta(f64),
    Uniform,
    /// Atoms (θ_i, w_i) with θ_i ∈ (0,1); weights sum to one and the list is
    /// invariant under θ ↦ 1−θ.
    Atoms(Vec<(f64, f64)>),
}

const SYMMETRY_TOL: f64 = 1e-12;

impl KernelSpec {
    pub fn symmetric_beta(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Invariant(format!("symmetric-beta parameter must be positive, got {lambda}")));
        }
        Ok(KernelSpec::SymmetricBeta(lambda))
    }

    /// Weights are normalized; the list must already be symmetric about 1/2.
    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invariant("kernel atom list is empty".into()));
        }
        for &(t, w) in &atoms {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Invariant(format!("kernel atom {t} outside (0,1)")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Invariant(format!("kernel atom weight must be nonnegative: {w}")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if total <= 0.0 {
            return Err(Error::Invariant("kernel atom weights sum to zero".into()));
        }
        let atoms: Vec<(f64, f64)> = atoms.into_iter().map(|(t, w)| (t, w / total)).collect();
        // Symmetry: the mass at θ equals the mass at 1−θ.
        for &(t, _) in &atoms {
            let mass = |c: f64| -> f64 {
                atoms.iter().filter(|a| (a.0 - c).abs() <= SYMMETRY_TOL).map(|a| a.1).sum()
            };
            if (mass(t) - mass(1.0 - t)).abs() > 1e-9 {
                return Err(Error::Invariant(format!(
                    "kernel atoms are not symmetric about 1/2: mass {} at {t} vs {} at {}",
                    mass(t),
                    mass(1.0 - t),
                    1.0 - t
                )));
            }
        }
        Ok(KernelSpec::Atoms(atoms))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::DiracHalf => "dirac-half",
            KernelSpec::SymmetricBeta(_) => "symmetric-beta",
            KernelSpec::Uniform => "uniform",
            KernelSpec::Atoms(_) => "atoms",
        }
    }

    /// Integrability threshold α₀ = inf{α : E[Θ^α] < ∞}; moments exist for α > α₀.
    pub fn alpha0(&self) -> f64 {
        match *self {
            KernelSpec::DiracHalf | KernelSpec::Atoms(_) => f64::NEG_INFINITY,
            KernelSpec::SymmetricBeta(l) => -l,
            KernelSpec::Uniform => -1.0,
        }
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if alpha > self.alpha0() {
            Ok(())
        } else {
            Err(Error::Divergence(format!(
                "E[Θ^{alpha}] diverges for the {} kernel (threshold α₀ = {})",
                self.family_name(),
                self.alpha0()
            )))
        }
    }

    /// E[Θ^α]
    pub fn moment(&self, alpha: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(match *self {
            KernelSpec::DiracHalf => 0.5f64.powf(alpha),
            KernelSpec::Uniform => 1.0 / (alpha + 1.0),
            KernelSpec::SymmetricBeta(l) => (ln_beta(l + alpha, l) - ln_beta(l, l)).exp(),
            KernelSpec::Atoms(ref a) => a.iter().map(|&(t, w)| w * t.powf(alpha)).sum(),
        })
    }

    /// E[Θ^α ln(1/Θ)]
    pub fn log_moment(&self, alpha: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(match *self {
            KernelSpec::DiracHalf => 0.5f64.powf(alpha) * std::f64::consts::LN_2,
            KernelSpec::Uniform => 1.0 / ((alpha + 1.0) * (alpha + 1.0)),
            KernelSpec::SymmetricBeta(l) => {
                self.moment(alpha)? * (digamma(2.0 * l + alpha) - digamma(l + alpha))
            }
            KernelSpec::Atoms(ref a) => a.iter().map(|&(t, w)| -w * t.powf(alpha) * t.ln()).sum(),
        })
    }

    /// ψ(α) = 2E[Θ^α] − 1
    pub fn psi(&self, alpha: f64) -> Result<f64> {
        Ok(2.0 * self.moment(alpha)? - 1.0)
    }

    /// Density on (0,1) for the continuous families.
    pub fn density(&self, theta: f64) -> Option<f64> {
        match *self {
            KernelSpec::Uniform => Some(if theta > 0.0 && theta < 1.0 { 1.0 } else { 0.0 }),
            KernelSpec::SymmetricBeta(l) => Some(if theta > 0.0 && theta < 1.0 {
                ((l - 1.0) * (theta.ln() + (1.0 - theta).ln()) - ln_beta(l, l)).exp()
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// E[f(Θ)], summed for atomic kernels and by quadrature otherwise.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        match *self {
            KernelSpec::DiracHalf => Ok(f(0.5)),
            KernelSpec::Atoms(ref a) => Ok(a.iter().map(|&(t, w)| w * f(t)).sum()),
            _ => {
                let d = |t: f64| f(t) * self.density(t).unwrap_or(0.0);
                // Split at 1/2 so both endpoint singularities get their own refinement.
                Ok(integrate(&d, 0.0, 0.5, tol)? + integrate(&d, 0.5, 1.0, tol)?)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            KernelSpec::DiracHalf => 0.5,
            KernelSpec::Uniform => rng.random::<f64>(),
            KernelSpec::SymmetricBeta(l) => Beta::new(l, l).expect("validated λ > 0").sample(rng),
            KernelSpec::Atoms(ref a) => sample_categorical(a, rng),
        }
    }

    /// Law of a split drawn from κ̂(dθ) ∝ θ^α κ(dθ), the tilt used by weighted spines.
    pub fn tilted(&self, alpha: f64) -> Result<SplitLaw> {
        let z = self.moment(alpha)?;
        Ok(match *self {
            KernelSpec::DiracHalf => SplitLaw::Point(0.5),
            KernelSpec::Uniform => SplitLaw::Beta { a: 1.0 + alpha, b: 1.0 },
            KernelSpec::SymmetricBeta(l) => SplitLaw::Beta { a: l + alpha, b: l },
            KernelSpec::Atoms(ref a) => {
                SplitLaw::Atoms(a.iter().map(|&(t, w)| (t, w * t.powf(alpha) / z)).collect())
            }
        })
    }

    /// κ itself as a split law.
    pub fn as_split_law(&self) -> SplitLaw {
        match *self {
            KernelSpec::DiracHalf => SplitLaw::Point(0.5),
            KernelSpec::Uniform => SplitLaw::Beta { a: 1.0, b: 1.0 },
            KernelSpec::SymmetricBeta(l) => SplitLaw::Beta { a: l, b: l },
            KernelSpec::Atoms(ref a) => SplitLaw::Atoms(a.clone()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::SymmetricBeta(l) => write!(f, "symmetric-beta({l})"),
            KernelSpec::Atoms(a) => write!(f, "atoms({a:?})"),
            other => f.write_str(other.family_name()),
        }
    }
}

fn sample_categorical<R: Rng + ?Sized>(atoms: &[(f64, f64)], rng: &mut R) -> f64 {
    let mut u: f64 = rng.random();
    for &(t, w) in atoms {
        if u < w {
            return t;
        }
        u -= w;
    }
    atoms.iter().rev().find(|a| a.1 > 0.0).map(|a| a.0).unwrap_or(0.5)
}

/// A (not necessarily symmetric) law on (0,1) from which splits are drawn.
#[derive(Clone)]
pub enum SplitLaw {
    Point(f64),
    Beta { a: f64, b: f64 },
    /// Normalized atoms.
    Atoms(Vec<(f64, f64)>),
    /// Piecewise-linear inverse CDF on a fine grid, for arbitrary reweightings.
    Tabulated(Arc<Vec<(f64, f64)>>),
}

impl fmt::Debug for SplitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitLaw::Point(t) => write!(f, "Point({t})"),
            SplitLaw::Beta { a, b } => write!(f, "Beta({a}, {b})"),
            SplitLaw::Atoms(a) => write!(f, "Atoms({a:?})"),
            SplitLaw::Tabulated(t) => write!(f, "Tabulated({} nodes)", t.len()),
        }
    }
}

impl SplitLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SplitLaw::Point(t) => *t,
            SplitLaw::Beta { a, b } => {
                if *a == 1.0 && *b == 1.0 {
                    rng.random::<f64>()
                } else {
                    Beta::new(*a, *b).expect("positive shape parameters").sample(rng)
                }
            }
            SplitLaw::Atoms(a) => sample_categorical(a, rng),
            SplitLaw::Tabulated(cdf) => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|&(_, c)| c < u).clamp(1, cdf.len() - 1);
                let (t0, c0) = cdf[i - 1];
                let (t1, c1) = cdf[i];
                if c1 > c0 {
                    t0 + (t1 - t0) * (u - c0) / (c1 - c0)
                } else {
                    t1
                }
            }
        }
    }

    /// E[f(Θ̂)]
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        match self {
            SplitLaw::Point(t) => Ok(f(*t)),
            SplitLaw::Atoms(a) => Ok(a.iter().map(|&(t, w)| w * f(t)).sum()),
            SplitLaw::Beta { a, b } => {
                let lb = ln_beta(*a, *b);
                let d = |t: f64| f(t) * ((a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln() - lb).exp();
                Ok(integrate(&d, 0.0, 0.5, tol)? + integrate(&d, 0.5, 1.0, tol)?)
            }
            SplitLaw::Tabulated(cdf) => Ok(cdf
                .windows(2)
                .map(|w| (w[1].1 - w[0].1) * f(0.5 * (w[0].0 + w[1].0)))
                .sum()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn dirac_half_moments() {
        let k = KernelSpec::DiracHalf;
        assert_eq!(k.moment(1.0).unwrap(), 0.5);
        assert_eq!(k.moment(-1.0).unwrap(), 2.0);
        assert!((k.log_moment(0.0).unwrap() - 0.693_147_180_559_945_3).abs() < 1e-15);
        assert!((k.log_moment(1.0).unwrap() - 0.346_573_590_279_972_65).abs() < 1e-15);
    }

    #[test]
    fn uniform_diverges_at_minus_one() {
        assert!(matches!(KernelSpec::Uniform.moment(-1.0), Err(Error::Divergence(_))));
        assert_eq!(KernelSpec::Uniform.log_moment(0.0).unwrap(), 1.0);
    }

    #[test]
    fn beta_moment_matches_quadrature() {
        let k = KernelSpec::symmetric_beta(2.0).unwrap();
        for &a in &[-1.5, -0.5, 0.5, 2.0] {
            let q = k.expectation(|t| t.powf(a), Tolerance::default()).unwrap();
            assert!((q / k.moment(a).unwrap() - 1.0).abs() < 1e-8, "α = {a}");
        }
        assert!(k.moment(-2.0).is_err());
    }

    #[test]
    fn asymmetric_atoms_rejected() {
        assert!(KernelSpec::atoms(vec![(0.3, 1.0)]).is_err());
        let k = KernelSpec::atoms(vec![(0.3, 2.0), (0.7, 2.0)]).unwrap();
        assert_eq!(k.moment(1.0).unwrap(), 0.5);
    }

    #[test]
    fn tilted_uniform_has_beta_mean() {
        let law = KernelSpec::Uniform.tilted(1.0).unwrap();
        let mut rng = seeded(1);
        let n = 50_000;
        let mean = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.005);
    }
}

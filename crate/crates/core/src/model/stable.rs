//! One-sided stable jump measure ρ(dz) = scale·z^(−2−𝔟) dz, 𝔟 ∈ (−1, 0).

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::quadrature::{integrate_power_ends, PowerEnds, Tolerance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableJumpSpec {
    /// Nonnegative density prefactor of z^(−2−𝔟).
    pub scale: f64,
    /// Stability exponent 𝔟 ∈ (−1, 0).
    pub b: f64,
}

impl StableJumpSpec {
    pub fn new(scale: f64, b: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::Invariant(format!("stable scale must be nonnegative, got {scale}")));
        }
        if !(b > -1.0 && b < 0.0) {
            return Err(Error::Invariant(format!("stable exponent 𝔟 outside (−1,0): {b}")));
        }
        Ok(StableJumpSpec { scale, b })
    }

    /// Stable jumps switched off.
    pub fn disabled() -> Self {
        StableJumpSpec { scale: 0.0, b: -0.5 }
    }

    /// Scale from a signed constant c ≤ 0 through c·𝔟·(𝔟+1)/Γ(1−𝔟), which is
    /// nonnegative on the admissible range.
    pub fn from_signed_constant(c: f64, b: f64) -> Result<Self> {
        if c > 0.0 {
            return Err(Error::Invariant(format!("signed stable constant must be ≤ 0, got {c}")));
        }
        Self::new(c * b * (b + 1.0) / gamma(1.0 - b), b)
    }

    pub fn is_enabled(&self) -> bool {
        self.scale > 0.0
    }

    pub fn density(&self, z: f64) -> f64 {
        self.scale * z.powf(-2.0 - self.b)
    }

    /// ρ([ε, ∞)) = scale·ε^(−1−𝔟)/(1+𝔟)
    pub fn tail_mass(&self, eps: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * eps.powf(-1.0 - self.b) / (1.0 + self.b)
    }

    /// ∫_{(0,ε)} z ρ(dz) = scale·ε^(−𝔟)/(−𝔟)
    pub fn small_jump_mean(&self, eps: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * eps.powf(-self.b) / (-self.b)
    }

    /// Inverse-CDF draw from the normalized tail on [ε, ∞): ε·U^(−1/(1+𝔟)), U ∈ (0, 1].
    pub fn sample_tail<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        let u = 1.0 - rng.random::<f64>();
        self.jump_from_uniform(eps, u)
    }

    pub fn jump_from_uniform(&self, eps: f64, u: f64) -> f64 {
        eps * u.powf(-1.0 / (1.0 + self.b))
    }

    /// ∫ f(z) ρ(dz) over (0, ∞), for f = O(z) at 0 and bounded at ∞.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        self.integrate_with_growth(f, 1.0, 0.0, tol)
    }

    /// ∫ f(z) ρ(dz) when f(z) = O(z^near) at 0 and O(z^far) at ∞.
    pub fn integrate_with_growth<F: Fn(f64) -> f64>(&self, f: F, near: f64, far: f64, tol: Tolerance) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(0.0);
        }
        let b = self.b;
        let ends = PowerEnds { at_zero: near - 1.0 - b, at_infinity: 1.0 + b - far };
        Ok(self.scale * integrate_power_ends(|z: f64| f(z) * z.powf(-2.0 - b), 0.0, f64::INFINITY, ends, tol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_constant_gives_nonnegative_scale() {
        let s = StableJumpSpec::from_signed_constant(-1.0, -0.5).unwrap();
        assert!(s.scale > 0.0);
        assert!((s.scale - 0.25 / gamma(1.5)).abs() < 1e-15);
        assert!(StableJumpSpec::from_signed_constant(1.0, -0.5).is_err());
    }

    #[test]
    fn tail_mass_matches_quadrature() {
        let s = StableJumpSpec::new(1.0, -0.5).unwrap();
        assert_eq!(s.tail_mass(1.0), 2.0);
        let q = s.integrate(|z| if z >= 1.0 { 1.0 } else { 0.0 }, Tolerance::default());
        // The indicator is discontinuous at 1, which is a split point of the range.
        assert!((q.unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn sampler_endpoint() {
        let s = StableJumpSpec::new(1.0, -0.5).unwrap();
        assert_eq!(s.jump_from_uniform(0.7, 1.0), 0.7);
    }
}

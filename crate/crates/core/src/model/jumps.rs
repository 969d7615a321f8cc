//! Positive-jump measures π and their truncated moments and samplers.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::quadrature::{integrate_power_ends, integrate_range, PowerEnds, Tolerance};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum JumpMeasureSpec {
    None,
    /// α·z^(−1−β) dz on [z_lo, z_hi], β ∈ (1,2); z_hi may be +∞.
    PowerLaw { alpha: f64, beta: f64, z_lo: f64, z_hi: f64 },
    /// Σ w_i δ_{z_i}
    Atoms(Vec<(f64, f64)>),
    /// mass·rate·e^(−rate·z) dz on (0, ∞)
    Exponential { mass: f64, rate: f64 },
}

impl JumpMeasureSpec {
    pub fn power_law(alpha: f64, beta: f64, z_lo: f64, z_hi: f64) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::Invariant(format!("β_π outside (1,2): {beta}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Invariant(format!("power-law density must be nonnegative: α_π = {alpha}")));
        }
        if !(z_lo >= 0.0 && z_lo.is_finite() && z_hi > z_lo) {
            return Err(Error::Invariant(format!("power-law support [{z_lo}, {z_hi}] is not a valid interval")));
        }
        Self::checked(JumpMeasureSpec::PowerLaw { alpha, beta, z_lo, z_hi })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(z, w) in &atoms {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::Invariant(format!("atom location must be positive and finite: {z}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Invariant(format!("atom weight must be nonnegative: {w}")));
            }
        }
        Self::checked(JumpMeasureSpec::Atoms(atoms))
    }

    pub fn exponential(mass: f64, rate: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::Invariant(format!(
                "exponential density needs mass ≥ 0 and rate > 0, got ({mass}, {rate})"
            )));
        }
        Self::checked(JumpMeasureSpec::Exponential { mass, rate })
    }

    fn checked(self) -> Result<Self> {
        if !self.z_wedge_z2().is_finite() {
            return Err(Error::Invariant("π lacks finite z∧z² moment".into()));
        }
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            JumpMeasureSpec::None => true,
            JumpMeasureSpec::PowerLaw { alpha, .. } => *alpha == 0.0,
            JumpMeasureSpec::Atoms(a) => a.iter().all(|&(_, w)| w == 0.0),
            JumpMeasureSpec::Exponential { mass, .. } => *mass == 0.0,
        }
    }

    /// ∫_{[lo,hi)} z^k π(dz); may be +∞.
    pub fn moment_on(&self, k: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match *self {
            JumpMeasureSpec::None => 0.0,
            JumpMeasureSpec::PowerLaw { alpha, beta, z_lo, z_hi } => {
                let a = lo.max(z_lo);
                let b = hi.min(z_hi);
                if b <= a || alpha == 0.0 {
                    return 0.0;
                }
                let e = k - beta;
                if e == 0.0 {
                    return alpha * (b / a).ln();
                }
                let pa = if a == 0.0 {
                    if e < 0.0 { f64::INFINITY } else { 0.0 }
                } else {
                    a.powf(e)
                };
                let pb = if b.is_infinite() {
                    if e > 0.0 { f64::INFINITY } else { 0.0 }
                } else {
                    b.powf(e)
                };
                if pa.is_infinite() || pb.is_infinite() {
                    return f64::INFINITY;
                }
                alpha * (pb - pa) / e
            }
            JumpMeasureSpec::Atoms(ref atoms) => atoms
                .iter()
                .filter(|&&(z, _)| z >= lo && z < hi)
                .map(|&(z, w)| w * z.powf(k))
                .sum(),
            JumpMeasureSpec::Exponential { mass, rate } => {
                if mass == 0.0 {
                    return 0.0;
                }
                if k <= -1.0 && lo <= 0.0 {
                    return f64::INFINITY;
                }
                // ∫_a^b z^k λe^{−λz} dz = λ^{−k} Γ(k+1) [Q(k+1, λa) − Q(k+1, λb)]
                let s = k + 1.0;
                let q = |z: f64| if z.is_infinite() { 0.0 } else { gamma_ur(s, rate * z) };
                let upper = if lo <= 0.0 { 1.0 } else { q(lo) };
                mass * (ln_gamma(s) - k * rate.ln()).exp() * (upper - q(hi))
            }
        }
    }

    pub fn moment(&self, k: f64) -> f64 {
        self.moment_on(k, 0.0, f64::INFINITY)
    }

    /// π([ε, ∞))
    pub fn tail_mass(&self, eps: f64) -> f64 {
        self.moment_on(0.0, eps, f64::INFINITY)
    }

    /// ∫_{[ε,∞)} z^k π(dz)
    pub fn tail_moment(&self, k: f64, eps: f64) -> f64 {
        self.moment_on(k, eps, f64::INFINITY)
    }

    /// ∫_{(0,ε)} z^k π(dz)
    pub fn head_moment(&self, k: f64, eps: f64) -> f64 {
        self.moment_on(k, 0.0, eps)
    }

    /// ∫ (z ∧ z²) π(dz)
    pub fn z_wedge_z2(&self) -> f64 {
        self.head_moment(2.0, 1.0) + self.tail_moment(1.0, 1.0)
    }

    /// ∫ (z² ∧ z³) π(dz)
    pub fn z2_wedge_z3(&self) -> f64 {
        self.head_moment(3.0, 1.0) + self.tail_moment(2.0, 1.0)
    }

    /// ∫ (z ∨ z⁶) π(dz)
    pub fn z_vee_z6(&self) -> f64 {
        self.head_moment(1.0, 1.0) + self.tail_moment(6.0, 1.0)
    }

    /// ∫ f(z) π(dz) by summation or quadrature, for f = O(z²) at 0 and O(z) at ∞.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        self.integrate_with_growth(f, 2.0, 1.0, tol)
    }

    /// ∫ f(z) π(dz) when f(z) = O(z^near) at 0 and O(z^far) at ∞. The orders only steer the
    /// power-law quadrature; other measures ignore them.
    pub fn integrate_with_growth<F: Fn(f64) -> f64>(&self, f: F, near: f64, far: f64, tol: Tolerance) -> Result<f64> {
        match *self {
            JumpMeasureSpec::None => Ok(0.0),
            JumpMeasureSpec::Atoms(ref atoms) => Ok(atoms.iter().map(|&(z, w)| w * f(z)).sum()),
            JumpMeasureSpec::PowerLaw { alpha, beta, z_lo, z_hi } => {
                if alpha == 0.0 {
                    return Ok(0.0);
                }
                let ends = PowerEnds { at_zero: near - beta, at_infinity: beta - far };
                let v = integrate_power_ends(|z: f64| f(z) * z.powf(-1.0 - beta), z_lo, z_hi, ends, tol)?;
                Ok(alpha * v)
            }
            JumpMeasureSpec::Exponential { mass, rate } => {
                if mass == 0.0 {
                    return Ok(0.0);
                }
                let v = integrate_range(|z: f64| f(z) * (-rate * z).exp(), 0.0, f64::INFINITY, tol)?;
                Ok(mass * rate * v)
            }
        }
    }

    /// Sample from π restricted to [ε, ∞), normalized. Requires positive tail mass.
    pub fn sample_tail<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        match *self {
            JumpMeasureSpec::None => f64::NAN,
            JumpMeasureSpec::PowerLaw { beta, z_lo, z_hi, .. } => {
                sample_power_density(1.0 + beta, eps.max(z_lo), z_hi, rng)
            }
            JumpMeasureSpec::Atoms(ref atoms) => sample_atoms(atoms, eps, |_| 1.0, rng),
            JumpMeasureSpec::Exponential { rate, .. } => {
                let e: f64 = Exp1.sample(rng);
                eps.max(0.0) + e / rate
            }
        }
    }

    /// Sample from z·π(dz) restricted to [ε, ∞), normalized.
    pub fn sample_tail_size_biased<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        match *self {
            JumpMeasureSpec::None => f64::NAN,
            JumpMeasureSpec::PowerLaw { beta, z_lo, z_hi, .. } => {
                sample_power_density(beta, eps.max(z_lo), z_hi, rng)
            }
            JumpMeasureSpec::Atoms(ref atoms) => sample_atoms(atoms, eps, |z| z, rng),
            JumpMeasureSpec::Exponential { rate, .. } => {
                // (ε + w)e^{−λw}: mixture of Exp(λ) with weight ελ/(ελ+1) and Gamma(2, λ).
                let e0 = eps.max(0.0);
                let e1: f64 = Exp1.sample(rng);
                let w = if rng.random::<f64>() < e0 * rate / (e0 * rate + 1.0) {
                    e1 / rate
                } else {
                    let e2: f64 = Exp1.sample(rng);
                    (e1 + e2) / rate
                };
                e0 + w
            }
        }
    }
}

/// Inverse-CDF sample from density ∝ z^(−s) on [a, b], s > 1, a > 0.
fn sample_power_density<R: Rng + ?Sized>(s: f64, a: f64, b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let e = 1.0 - s;
    let pa = a.powf(e);
    let pb = if b.is_infinite() { 0.0 } else { b.powf(e) };
    (pa - u * (pa - pb)).powf(1.0 / e).clamp(a, b)
}

fn sample_atoms<R: Rng + ?Sized, W: Fn(f64) -> f64>(
    atoms: &[(f64, f64)],
    eps: f64,
    weight: W,
    rng: &mut R,
) -> f64 {
    let total: f64 = atoms.iter().filter(|a| a.0 >= eps).map(|&(z, w)| w * weight(z)).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = f64::NAN;
    for &(z, w) in atoms.iter().filter(|a| a.0 >= eps) {
        let m = w * weight(z);
        if m > 0.0 {
            last = z;
            if u < m {
                return z;
            }
            u -= m;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn beta_outside_range_is_rejected() {
        let e = JumpMeasureSpec::power_law(1.0, 0.5, 0.0, f64::INFINITY).unwrap_err();
        assert!(e.to_string().contains("β_π outside (1,2)"));
    }

    #[test]
    fn power_law_moments_match_quadrature() {
        let pi = JumpMeasureSpec::power_law(0.7, 1.4, 0.0, f64::INFINITY).unwrap();
        let tol = Tolerance::default();
        let wedge = pi.integrate(|z| z.min(z * z), tol).unwrap();
        assert!((wedge - pi.z_wedge_z2()).abs() < 1e-7 * wedge);
        let tail = pi.tail_mass(0.1);
        assert!((tail - 0.7 * 0.1f64.powf(-1.4) / 1.4).abs() < 1e-12);
        assert!(pi.moment(2.0).is_infinite());
    }

    #[test]
    fn exponential_moments_are_gamma_moments() {
        let pi = JumpMeasureSpec::exponential(2.0, 0.5).unwrap();
        assert!((pi.moment(1.0) - 2.0 * 2.0).abs() < 1e-10);
        assert!((pi.moment(2.0) - 2.0 * 2.0 * 4.0).abs() < 1e-9);
        let tail = pi.tail_moment(1.0, 1.0) + pi.head_moment(1.0, 1.0);
        assert!((tail - pi.moment(1.0)).abs() < 1e-10);
        assert!((pi.tail_mass(1.0) - 2.0 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn atoms_are_summed_with_half_open_windows() {
        let pi = JumpMeasureSpec::atoms(vec![(0.5, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(pi.tail_mass(0.5), 4.0);
        assert_eq!(pi.head_moment(1.0, 2.0), 0.5);
        assert_eq!(pi.moment(2.0), 0.25 + 12.0);
    }

    #[test]
    fn power_law_tail_sampler_matches_cdf() {
        let pi = JumpMeasureSpec::power_law(1.0, 1.5, 0.0, f64::INFINITY).unwrap();
        let mut rng = seeded(3);
        let n = 100_000;
        let hits = (0..n).filter(|_| pi.sample_tail(1.0, &mut rng) > 4.0).count();
        let p = hits as f64 / n as f64;
        let expect = 4f64.powf(-1.5);
        assert!((p - expect).abs() < 4.0 * (expect * (1.0 - expect) / n as f64).sqrt());
    }

    #[test]
    fn size_biased_exponential_has_right_mean() {
        let pi = JumpMeasureSpec::exponential(1.0, 2.0).unwrap();
        let eps = 0.3;
        let mut rng = seeded(4);
        let n = 100_000;
        let mean = (0..n).map(|_| pi.sample_tail_size_biased(eps, &mut rng)).sum::<f64>() / n as f64;
        let expect = pi.tail_moment(2.0, eps) / pi.tail_moment(1.0, eps);
        assert!((mean - expect).abs() < 0.01 * expect);
    }
}

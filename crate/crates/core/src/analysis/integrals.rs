//! The constants C_a, I_a(x) and the drift-balance functional G_a.

use crate::model::{JumpMeasureSpec, ModelSpec, StableJumpSpec};
use crate::quadrature::{integrate_power_ends, PowerEnds, Tolerance};
use crate::{Error, Result};

fn check_stable_tail(a: f64, stable: &StableJumpSpec) -> Result<()> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("C_a needs a ≥ 0, got {a}")));
    }
    // Both integrands behave like z^(−1−a−𝔟) at infinity.
    if a + stable.b <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "C_a tail integrand ~ z^{:.3} is not integrable at ∞ (a = {a}, 𝔟 = {})",
            -1.0 - a - stable.b,
            stable.b
        )));
    }
    Ok(())
}

/// C_a = (1+𝔟)⁻¹ ∫ z (1+z)^(−a) ρ(dz), by adaptive quadrature of the defining integral.
pub fn compute_ca(a: f64, stable: &StableJumpSpec) -> Result<f64> {
    if !stable.is_enabled() {
        return Ok(0.0);
    }
    check_stable_tail(a, stable)?;
    let v = stable.integrate_with_growth(|z| z * (-a * z.ln_1p()).exp(), 1.0, 1.0 - a, Tolerance::default())?;
    Ok(v / (1.0 + stable.b))
}

/// The same constant through (1−a)⁻¹ ∫ ((1+z)^(1−a) − 1) ρ(dz), or ∫ ln(1+z) ρ(dz) at a = 1.
pub fn compute_ca_alt(a: f64, stable: &StableJumpSpec) -> Result<f64> {
    if !stable.is_enabled() {
        return Ok(0.0);
    }
    check_stable_tail(a, stable)?;
    if a == 1.0 {
        // ln(1+z) outgrows every constant; claim half the available decay.
        return stable.integrate_with_growth(|z| z.ln_1p(), 1.0, 0.5 * (1.0 + stable.b), Tolerance::default());
    }
    let e = 1.0 - a;
    let v = stable.integrate_with_growth(|z| (e * z.ln_1p()).exp_m1(), 1.0, e.max(0.0), Tolerance::default())?;
    Ok(v / e)
}

fn ia_prefactor(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        a
    }
}

/// h(y) = ∫₀¹ (1−v)(1+yv)^(−1−a) dv, evaluated exactly. The integrand peaks in a layer of
/// width 1/y at v = 0, where absolute-tolerance quadrature loses the value once y is large.
fn h_inner(a: f64, y: f64) -> f64 {
    if y <= 0.5 {
        // Binomial series: Σ_k C(−1−a, k) y^k / ((k+1)(k+2)); terms shrink at least like 2^(−k).
        let (mut c, mut sum) = (1.0, 0.5);
        for k in 1..200 {
            c *= -(a + k as f64) * y / k as f64;
            let term = c / ((k + 1) * (k + 2)) as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    // With s = 1+yv: y⁻² ∫₁^(1+y) (1+y−s) s^(−1−a) ds.
    let l = y.ln_1p();
    let first = if a == 0.0 { (1.0 + y) * l } else { -(1.0 + y) * (-a * l).exp_m1() / a };
    let second = if a == 1.0 { l } else { ((1.0 - a) * l).exp_m1() / (1.0 - a) };
    (first - second) / (y * y)
}

/// ∫₀¹ w²(1−v)(1+wv)^(−1−a) dv, the inner integral of I_a after scaling by x.
fn inner_v(a: f64, w: f64) -> f64 {
    w * w * h_inner(a, w)
}

/// I_a(x) = (a + 1_{a=0}) x⁻² ∫∫₀¹ z²(1−v)(1 + zv/x)^(−1−a) dv π(dz), by nested quadrature.
pub fn compute_ia(a: f64, x: f64, pi: &JumpMeasureSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("I_a needs x > 0, got {x}")));
    }
    if pi.is_zero() {
        return Ok(0.0);
    }
    // z² = x²w² cancels the x⁻² prefactor. The integrand grows like z/a at ∞, or z ln z at a = 0.
    let far = match (a, pi) {
        (0.0, JumpMeasureSpec::PowerLaw { beta, .. }) => 1.0 + 0.1 * (beta - 1.0),
        _ => 1.0,
    };
    let outer = pi.integrate_with_growth(|z| inner_v(a, z / x), 2.0, far, Tolerance::default())?;
    Ok(ia_prefactor(a) * outer)
}

/// 𝔍_a for π = α_π z^(−1−β_π) on (0, ∞): (a + 1_{a=0}) α_π ∫₀^∞ ∫₀¹ y^(1−β_π)(1−v)(1+yv)^(−1−a) dv dy,
/// so that I_a(x) = 𝔍_a / x^β_π. `None` when π is not of that form.
pub fn power_law_j(a: f64, pi: &JumpMeasureSpec) -> Result<Option<f64>> {
    let JumpMeasureSpec::PowerLaw { alpha, beta, z_lo, z_hi } = *pi else {
        return Ok(None);
    };
    if z_lo != 0.0 || z_hi.is_finite() {
        return Ok(None);
    }
    if a + beta - 1.0 <= 0.0 {
        return Err(Error::NonConvergence(format!("𝔍_a diverges for a = {a}, β_π = {beta}")));
    }
    let far = if a == 0.0 { 0.9 * (beta - 1.0) } else { beta - 1.0 };
    let outer = integrate_power_ends(
        |y: f64| y.powf(1.0 - beta) * h_inner(a, y),
        0.0,
        f64::INFINITY,
        PowerEnds { at_zero: 2.0 - beta, at_infinity: far },
        Tolerance::default(),
    )?;
    Ok(Some(ia_prefactor(a) * alpha * outer))
}

/// I_a(x) through the power-law separation 𝔍_a / x^β_π.
pub fn compute_ia_separated(a: f64, x: f64, pi: &JumpMeasureSpec) -> Result<Option<f64>> {
    let JumpMeasureSpec::PowerLaw { beta, .. } = *pi else {
        return Ok(None);
    };
    Ok(power_law_j(a, pi)?.map(|j| j / x.powf(beta)))
}

enum IaRoute {
    Zero,
    Separated { j: f64, beta: f64 },
    Nested,
}

/// G_a with the x-independent pieces (C_a, E[Θ^(1−a)], 𝔍_a) computed once.
pub struct GaEvaluator<'a> {
    spec: &'a ModelSpec,
    a: f64,
    ca: f64,
    theta_moment: f64,
    ia: IaRoute,
}

impl<'a> GaEvaluator<'a> {
    pub fn new(a: f64, spec: &'a ModelSpec) -> Result<Self> {
        if a == 1.0 {
            return Err(Error::Domain("G_a is undefined at a = 1; probe 1 ± δ".into()));
        }
        let theta_moment = spec.kappa.moment(1.0 - a)?;
        let ca = compute_ca(a, &spec.stable)?;
        let ia = if spec.p.is_identically_zero() || spec.pi.is_zero() {
            IaRoute::Zero
        } else {
            match (&spec.pi, power_law_j(a, &spec.pi)?) {
                (JumpMeasureSpec::PowerLaw { beta, .. }, Some(j)) => IaRoute::Separated { j, beta: *beta },
                _ => IaRoute::Nested,
            }
        };
        Ok(GaEvaluator { spec, a, ca, theta_moment, ia })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn ca(&self) -> f64 {
        self.ca
    }

    pub fn ia(&self, x: f64) -> Result<f64> {
        match self.ia {
            IaRoute::Zero => Ok(0.0),
            IaRoute::Separated { j, beta } => Ok(j / x.powf(beta)),
            IaRoute::Nested => compute_ia(self.a, x, &self.spec.pi),
        }
    }

    /// The bracket g/x − aσ²/x² + x^(−𝔟)C_a − p I_a, shared by G_a, SN0 and SN∞.
    pub fn drift_bracket(&self, x: f64) -> Result<f64> {
        let s = self.spec;
        let stable = if self.ca == 0.0 { 0.0 } else { x.powf(-s.stable.b) * self.ca };
        let p = s.p.eval(x);
        let jumps = if p == 0.0 { 0.0 } else { p * self.ia(x)? };
        Ok(s.g.eval(x) / x - self.a * s.sigma2.eval(x) / (x * x) + stable - jumps)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("G_a needs x > 0, got {x}")));
        }
        let division = 2.0 * self.spec.r.eval(x) * (self.theta_moment - 1.0);
        Ok((self.a - 1.0) * self.drift_bracket(x)? - division)
    }
}

/// G_a(x) = (a−1)[g/x − aσ²/x² + x^(−𝔟)C_a − p I_a − 2r(E[Θ^(1−a)] − 1)/(a−1)].
pub fn compute_ga(a: f64, x: f64, spec: &ModelSpec) -> Result<f64> {
    GaEvaluator::new(a, spec)?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionSpec, KernelSpec};
    use crate::quadrature::integrate;

    #[test]
    fn exact_inner_integral_matches_quadrature_on_both_branches() {
        for a in [0.0, 0.3, 1.0, 2.0, 4.5] {
            for y in [1e-6, 0.1, 0.5, 0.5000001, 2.0, 50.0, 1e4] {
                let q = integrate(|v: f64| (1.0 - v) * (1.0 + y * v).powf(-1.0 - a), 0.0, 1.0, Tolerance::inner()).unwrap();
                let h = h_inner(a, y);
                assert!((h - q).abs() <= 1e-10 * q, "a={a} y={y}: {h} vs {q}");
            }
        }
    }

    #[test]
    fn ga_vanishes_for_the_balanced_halving_preset() {
        let spec = ModelSpec::default()
            .with_g(FunctionSpec::linear(2.0))
            .with_r(FunctionSpec::constant(1.0))
            .with_kappa(KernelSpec::DiracHalf);
        for x in [0.01, 1.0, 100.0] {
            assert!(compute_ga(2.0, x, &spec).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn ga_is_constant_for_geometric_motion() {
        let spec = ModelSpec::default()
            .with_g(FunctionSpec::linear(0.7))
            .with_sigma2(FunctionSpec::quadratic_affine(0.3, 0.0));
        for x in [0.01, 1.0, 100.0] {
            let v = compute_ga(0.4, x, &spec).unwrap();
            assert!((v - (0.4 - 1.0) * (0.7 - 0.4 * 0.3)).abs() < 1e-13);
        }
    }

    #[test]
    fn a_equal_one_is_rejected() {
        assert!(matches!(compute_ga(1.0, 1.0, &ModelSpec::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn heavy_tail_at_a_zero_does_not_converge() {
        let s = StableJumpSpec::new(1.0, -0.5).unwrap();
        assert!(matches!(compute_ca(0.0, &s), Err(Error::NonConvergence(_))));
        assert!(matches!(compute_ca_alt(0.0, &s), Err(Error::NonConvergence(_))));
        assert_eq!(compute_ca(0.0, &StableJumpSpec::disabled()).unwrap(), 0.0);
    }
}

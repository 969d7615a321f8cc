//! Coefficients of the time-inhomogeneous spine Y^(t) for r(x) = αx + β, g(x) = gx, q ≡ q.
//!
//! All three share the ratio built from D = g − β and E_s = e^{Ds} − 1; the denominator
//! D + αyE_s never vanishes because D and E_s have the same sign.

use crate::model::ModelSpec;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LdcgCoefficients<'a> {
    spec: &'a ModelSpec,
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    /// ∫ z² π(dz)
    pub pi_m2: f64,
}

impl<'a> LdcgCoefficients<'a> {
    /// Reads (g, α, β, q) off the spec. Rejects g = β, which the construction excludes.
    pub fn from_spec(spec: &'a ModelSpec) -> Result<Self> {
        let g = spec.g.linear_coefficient();
        let r = spec.r.affine_coefficients();
        let q = spec.q.constant_value();
        let (Some(g), Some((alpha, beta)), Some(q)) = (g, r, q) else {
            return Err(Error::Precondition(
                "the inhomogeneous spine needs g(x) = gx, r(x) = αx + β and constant q".into(),
            ));
        };
        if g == beta {
            return Err(Error::Domain("the inhomogeneous spine is not defined for g = β".into()));
        }
        if spec.stable.is_enabled() {
            return Err(Error::Precondition("the inhomogeneous spine needs stable jumps disabled".into()));
        }
        let pi_m2 = if spec.p.is_identically_zero() { 0.0 } else { spec.pi.moment(2.0) };
        Ok(LdcgCoefficients { spec, g, alpha, beta, q, pi_m2 })
    }

    pub fn spec(&self) -> &'a ModelSpec {
        self.spec
    }

    fn e(&self, s: f64) -> f64 {
        ((self.g - self.beta) * s).exp_m1()
    }

    fn den(&self, y: f64, s: f64) -> f64 {
        (self.g - self.beta) + self.alpha * y * self.e(s)
    }

    /// 2σ²(y) + p(y)∫z²π
    fn noise_push(&self, y: f64) -> f64 {
        let p = self.spec.p.eval(y);
        2.0 * self.spec.sigma2.eval(y) + if p == 0.0 { 0.0 } else { p * self.pi_m2 }
    }

    /// f1(y,s) = gy + (2σ²(y) + p(y)∫z²π)·αE_s/(D + αyE_s)
    pub fn f1(&self, y: f64, s: f64) -> f64 {
        let e = self.e(s);
        if e == 0.0 || self.alpha == 0.0 {
            return self.g * y;
        }
        self.g * y + self.noise_push(y) * self.alpha * e / self.den(y, s)
    }

    /// f2(y,s,θ) = 2(αy+β)(D + αθyE_s)/(D + αyE_s)
    pub fn f2(&self, y: f64, s: f64, theta: f64) -> f64 {
        let e = self.e(s);
        let base = 2.0 * (self.alpha * y + self.beta);
        if e == 0.0 || self.alpha == 0.0 {
            return base;
        }
        let d = self.g - self.beta;
        base * (d + self.alpha * theta * y * e) / (d + self.alpha * y * e)
    }

    /// ∫ f2(y,s,θ) κ(dθ), using E[Θ] = 1/2.
    pub fn f2_total(&self, y: f64, s: f64) -> f64 {
        self.f2(y, s, 0.5)
    }

    /// f3(y,s,z) = p(y)(1 + αzE_s/(D + αyE_s))
    pub fn f3(&self, y: f64, s: f64, z: f64) -> f64 {
        let p = self.spec.p.eval(y);
        if p == 0.0 {
            return 0.0;
        }
        let e = self.e(s);
        if e == 0.0 || self.alpha == 0.0 {
            return p;
        }
        p * (1.0 + self.alpha * z * e / self.den(y, s))
    }

    /// The factor multiplying z in f3: K(y,s) = αE_s/(D + αyE_s), so f3 = p(y)(1 + zK).
    pub fn f3_slope(&self, y: f64, s: f64) -> f64 {
        let e = self.e(s);
        if e == 0.0 || self.alpha == 0.0 {
            return 0.0;
        }
        self.alpha * e / self.den(y, s)
    }

    /// c_t = α|e^{(g−β)t} − 1|/|g−β|, so that f3(y,s,z) ≤ p(y)(1 + c_t z) for s ≤ t.
    pub fn envelope_c(&self, t: f64) -> f64 {
        self.alpha * self.e(t).abs() / (self.g - self.beta).abs()
    }

    /// A_t = α(e^{(g−β)t} − 1)/(g − β) ≥ 0.
    pub fn a_t(&self, t: f64) -> f64 {
        self.alpha * self.e(t) / (self.g - self.beta)
    }

    /// Drift of V(x) = x under the spine generator at time-to-go u:
    /// f1(x,u) − ∫ f2(x,u,θ)·x(1−θ) κ(dθ).
    pub fn lyapunov_drift(&self, x: f64, u: f64, theta_m2: f64) -> f64 {
        let e = self.e(u);
        let base = 2.0 * (self.alpha * x + self.beta);
        if e == 0.0 || self.alpha == 0.0 {
            return self.g * x - base * x * 0.5;
        }
        let d = self.g - self.beta;
        let ax = self.alpha * x * e;
        // ∫(D + αθxE)(1−θ)κ = D/2 + αxE(1/2 − E[Θ²])
        let split = base * x * (0.5 * d + ax * (0.5 - theta_m2)) / (d + ax);
        self.f1(x, u) - split
    }

    /// ḡ_t(y) = gy + (2σ²(y) + p(y)∫z²π)·A_t/(1 + yA_t), an upper bound on f1(y, s) for s ≤ t.
    pub fn g_bar(&self, y: f64, t: f64) -> f64 {
        let a = self.a_t(t);
        if a == 0.0 {
            return self.g * y;
        }
        self.g * y + self.noise_push(y) * a / (1.0 + y * a)
    }

    /// ĝ(y) = gy + (α1{β>g}/(β−g+αy) + 1{g>β}/y)(2σ²(y) + p(y)∫z²π), an upper bound on f1 for all s.
    pub fn g_hat(&self, y: f64) -> f64 {
        let push = self.noise_push(y);
        if push == 0.0 || self.alpha == 0.0 {
            return self.g * y;
        }
        let factor = if self.beta > self.g {
            self.alpha / (self.beta - self.g + self.alpha * y)
        } else {
            1.0 / y
        };
        self.g * y + factor * push
    }
}

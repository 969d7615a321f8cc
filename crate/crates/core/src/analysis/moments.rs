//! Closed-form first and second moments of N_t for r(x) = αx + β, g(x) = gx, q(x) ≡ q.

use serde::Serialize;

use crate::model::{ModelSpec, RunningExample};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentFormulas {
    pub g: f64,
    pub beta: f64,
    pub q: f64,
    pub alpha: f64,
}

/// Which exponential dominates E[N_t²] for large t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthRegime {
    /// β > max(g, q): both moments grow like e^{2(β−q)t}.
    DivisionLed,
    /// g > max(β, q) with α > 0: both grow like e^{2(g−q)t}.
    ParasiteLed,
}

impl MomentFormulas {
    pub fn new(g: f64, beta: f64, q: f64, alpha: f64) -> Result<Self> {
        if g == beta {
            return Err(Error::Domain("the moment formulas exclude g = β".into()));
        }
        if ![g, beta, q, alpha].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("moment parameters must be finite".into()));
        }
        Ok(MomentFormulas { g, beta, q, alpha })
    }

    /// Reads (g, β, q, α) off a spec with g(x) = gx, r affine and q constant.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let g = spec.g.linear_coefficient();
        let r = spec.r.affine_coefficients();
        let q = spec.q.constant_value();
        match (g, r, q) {
            (Some(g), Some((alpha, beta)), Some(q)) => Self::new(g, beta, q, alpha),
            _ => Err(Error::Precondition(
                "moment formulas need g(x) = gx, r(x) = αx + β and constant q".into(),
            )),
        }
    }

    pub fn from_running_example(p: &RunningExample) -> Result<Self> {
        if p.alpha_q != 0.0 {
            return Err(Error::Precondition("moment formulas need α_q = 0".into()));
        }
        Self::new(p.alpha_g, p.beta, p.beta_q, p.alpha)
    }

    /// Same parameters with the death rate switched off.
    pub fn without_death(&self) -> Self {
        MomentFormulas { q: 0.0, ..*self }
    }

    fn a_coef(&self, x: f64) -> f64 {
        self.alpha * x / (self.g - self.beta)
    }

    /// m(x,s,t) = αx/(g−β)·e^{(g−q)(t−s)} + (1 − αx/(g−β))·e^{(β−q)(t−s)}
    pub fn mean(&self, x: f64, s: f64, t: f64) -> f64 {
        let a = self.a_coef(x);
        let h = t - s;
        a * ((self.g - self.q) * h).exp() + (1.0 - a) * ((self.beta - self.q) * h).exp()
    }

    /// m_q(x,s,t) − e^{−q(t−s)}·m_0(x,s,t); zero up to rounding.
    pub fn constant_death_gap(&self, x: f64, s: f64, t: f64) -> f64 {
        self.mean(x, s, t) - (-self.q * (t - s)).exp() * self.without_death().mean(x, s, t)
    }

    /// E[Σ_u X_t^u] = x e^{(g−q)t}
    pub fn mean_total_load(&self, x: f64, t: f64) -> f64 {
        x * ((self.g - self.q) * t).exp()
    }

    /// E[N_t²] from variation of constants on
    /// d/dt E[N²] = αx e^{(g−q)t}(1 + 2E[N_t]) + (β+q)E[N_t] + 2(β−q)E[N_t²].
    ///
    /// The exact equation has 2αE[N_t·ΣX_t] where this one has 2αx e^{(g−q)t}E[N_t]; the
    /// two agree only when α = 0. For α > 0 cell count and total load are positively
    /// correlated and the true E[N_t²] lies above this value.
    pub fn second_moment(&self, x: f64, t: f64) -> f64 {
        let (g, b, q, al) = (self.g, self.beta, self.q, self.alpha);
        let a = self.a_coef(x);
        let e = |c: f64| (c * t).exp();
        let e2b = e(2.0 * (b - q));
        // ∫₀ᵗ e^{2(β−q)(t−u)} e^{cu} du
        let conv = |c: f64| {
            let d = c - 2.0 * (b - q);
            if d.abs() < 1e-12 {
                t * e2b
            } else {
                (e(c) - e2b) / d
            }
        };
        e2b + al * x * conv(g - q)
            + 2.0 * al * x * a * conv(2.0 * (g - q))
            + 2.0 * al * x * (1.0 - a) * conv(g + b - 2.0 * q)
            + (b + q) * a * conv(g - q)
            + (b + q) * (1.0 - a) * conv(b - q)
    }

    pub fn regime(&self) -> Option<GrowthRegime> {
        if self.beta > self.g.max(self.q) {
            Some(GrowthRegime::DivisionLed)
        } else if self.g > self.beta.max(self.q) && self.alpha > 0.0 {
            Some(GrowthRegime::ParasiteLed)
        } else {
            None
        }
    }

    /// C_1²(x), the coefficient of e^{2(β−q)t} in E[N_t²] when β > max(g, q).
    pub fn c1_squared(&self, x: f64) -> Result<f64> {
        if self.regime() != Some(GrowthRegime::DivisionLed) {
            return Err(Error::Precondition("C_1² is defined for β > max(g, q)".into()));
        }
        let (g, b, q, al) = (self.g, self.beta, self.q, self.alpha);
        let u = al * x / (b - g);
        let w = 2.0 * b - g - q;
        Ok(1.0 + al * x / w - u * u + (1.0 + u) * (2.0 * u + (b + q) / (b - q)) - u * (b + q) / w)
    }

    /// lim E[N_t²]/E[N_t]² as t → ∞, per regime.
    pub fn asymptotic_ratio(&self, x: f64) -> Result<f64> {
        match self.regime() {
            Some(GrowthRegime::DivisionLed) => {
                let u = 1.0 + self.alpha * x / (self.beta - self.g);
                Ok(self.c1_squared(x)? / (u * u))
            }
            Some(GrowthRegime::ParasiteLed) => Ok(1.0),
            None => Err(Error::Precondition("no dominant growth regime".into())),
        }
    }
}

/// Bounds on the moments of N_t for the running example when α_q > α, α_g < β and β > β_q,
/// where no closed form is available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdaptedMomentBounds {
    pub alpha_g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_q: f64,
    pub beta_q: f64,
}

impl AdaptedMomentBounds {
    pub fn new(p: &RunningExample) -> Result<Self> {
        if !(p.alpha_q > p.alpha && p.alpha_g < p.beta && p.beta > p.beta_q) {
            return Err(Error::Precondition("bounds need α_q > α, α_g < β and β > β_q".into()));
        }
        Ok(AdaptedMomentBounds {
            alpha_g: p.alpha_g,
            alpha: p.alpha,
            beta: p.beta,
            alpha_q: p.alpha_q,
            beta_q: p.beta_q,
        })
    }

    /// Lower and upper bounds on E[N_t]. The lower bound uses E[Σ X] ≤ x e^{(α_g−β_q)t}.
    pub fn mean_bounds(&self, x: f64, t: f64) -> (f64, f64) {
        let growth = ((self.beta - self.beta_q) * t).exp();
        let d = self.alpha_g - self.beta;
        let lower = growth * (1.0 + (self.alpha - self.alpha_q) * x / d * ((d * t).exp() - 1.0));
        (lower, growth)
    }

    /// Upper bound on E[N_t²]: e^{2bt} + (α+α_q)x(e^{(α_g−β_q)t} − e^{2bt})/(α_g+β_q−2β)
    /// + (β+β_q)(e^{bt} − e^{2bt})/(β_q−β), b = β − β_q. The last term carries no factor x.
    pub fn second_moment_upper(&self, x: f64, t: f64) -> f64 {
        let b = self.beta - self.beta_q;
        let e2 = (2.0 * b * t).exp();
        let k1 = self.alpha_g + self.beta_q - 2.0 * self.beta;
        e2 + (self.alpha + self.alpha_q) / k1 * x * (((self.alpha_g - self.beta_q) * t).exp() - e2)
            + (self.beta + self.beta_q) / (self.beta_q - self.beta) * ((b * t).exp() - e2)
    }
}

//! Model specifications: rate functions, jump measures and partition kernels.

pub mod config;
pub mod expr;
pub mod function;
pub mod jumps;
pub mod kernel;
pub mod stable;

pub use config::{parse_model_config, to_toml};
pub use expr::Expr;
pub use function::FunctionSpec;
pub use jumps::JumpMeasureSpec;
pub use kernel::{KernelSpec, SplitLaw};
pub use stable::StableJumpSpec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::report::{ConditionReport, Scope, Verdict};
use crate::{Error, Result};

/// Full parameterization of one model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    /// Drift of the load.
    pub g: FunctionSpec,
    /// Diffusion coefficient σ² (the Brownian term is √(2σ²) dB).
    pub sigma2: FunctionSpec,
    /// Rate multiplying the compensated π-jumps.
    pub p: FunctionSpec,
    /// Division rate.
    pub r: FunctionSpec,
    /// Death rate.
    pub q: FunctionSpec,
    pub pi: JumpMeasureSpec,
    pub stable: StableJumpSpec,
    pub kappa: KernelSpec,
}

impl Default for ModelSpec {
    /// Every rate zero, no jumps, halving kernel.
    fn default() -> Self {
        ModelSpec {
            g: FunctionSpec::zero(),
            sigma2: FunctionSpec::zero(),
            p: FunctionSpec::zero(),
            r: FunctionSpec::zero(),
            q: FunctionSpec::zero(),
            pi: JumpMeasureSpec::None,
            stable: StableJumpSpec::disabled(),
            kappa: KernelSpec::DiracHalf,
        }
    }
}

/// Log-spaced validation grid on [10⁻⁶, 10⁶] with 10³ points.
pub fn validation_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 1000)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

const ZERO_TOL: f64 = 1e-12;

impl ModelSpec {
    pub fn with_g(mut self, f: FunctionSpec) -> Self {
        self.g = f;
        self
    }
    pub fn with_sigma2(mut self, f: FunctionSpec) -> Self {
        self.sigma2 = f;
        self
    }
    pub fn with_p(mut self, f: FunctionSpec) -> Self {
        self.p = f;
        self
    }
    pub fn with_r(mut self, f: FunctionSpec) -> Self {
        self.r = f;
        self
    }
    pub fn with_q(mut self, f: FunctionSpec) -> Self {
        self.q = f;
        self
    }
    pub fn with_pi(mut self, pi: JumpMeasureSpec) -> Self {
        self.pi = pi;
        self
    }
    pub fn with_stable(mut self, s: StableJumpSpec) -> Self {
        self.stable = s;
        self
    }
    pub fn with_kappa(mut self, k: KernelSpec) -> Self {
        self.kappa = k;
        self
    }

    /// Enforces the constructor invariants: 0 is absorbing for the load
    /// (g(0) = σ²(0) = p(0) = 0), σ², p, r, q are finite and nonnegative and
    /// p is nondecreasing on the validation grid.
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("g", &self.g), ("sigma2", &self.sigma2), ("p", &self.p)] {
            let v = f.eval(0.0);
            if !(v.abs() <= ZERO_TOL) {
                return Err(Error::Invariant(format!("{name}(0) = {v}, but 0 must be absorbing")));
            }
        }
        let grid = validation_grid();
        for (name, f) in [("sigma2", &self.sigma2), ("p", &self.p), ("r", &self.r), ("q", &self.q)] {
            for &x in std::iter::once(&0.0).chain(&grid) {
                let v = f.eval(x);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Invariant(format!(
                        "{name}({x:e}) = {v} is not a finite nonnegative rate"
                    )));
                }
            }
        }
        if let Some(x) = first_decrease(&self.p, &grid) {
            return Err(Error::Invariant(format!("p decreases near x = {x:e}")));
        }
        for &x in &grid {
            if !self.g.eval(x).is_finite() {
                return Err(Error::Invariant(format!("g({x:e}) is not finite")));
            }
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Total jump-free growth rate r − q at x.
    pub fn net_rate(&self, x: f64) -> f64 {
        self.r.eval(x) - self.q.eval(x)
    }

    pub fn sample_split<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.kappa.sample(rng)
    }

    /// Checkable clauses of the existence-and-uniqueness assumption.
    pub fn validate_assumption_eu(&self) -> ConditionReport {
        let grid = validation_grid();
        let grid_name = "log grid [1e-6, 1e6], 1000 points";

        // (i): g(0) = 0, p(0) = 0, p nondecreasing.
        let g0 = self.g.eval(0.0);
        let p0 = self.p.eval(0.0);
        let clause_i = if g0.abs() > ZERO_TOL {
            ConditionReport::fails("EU(i)", 0.0, -g0.abs(), Scope::Exact).with_note("g(0) ≠ 0")
        } else if p0.abs() > ZERO_TOL {
            ConditionReport::fails("EU(i)", 0.0, -p0.abs(), Scope::Exact).with_note("p(0) ≠ 0")
        } else if let Some(x) = first_decrease(&self.p, &grid) {
            let i = grid.iter().position(|&g| g == x).unwrap_or(0);
            let m = self.p.eval(grid[i + 1].min(grid[grid.len() - 1])) - self.p.eval(x);
            ConditionReport::fails("EU(i)", x, m, Scope::OnGrid).with_note("p decreases")
        } else {
            let mut r = ConditionReport::holds("EU(i)", Scope::OnGrid)
                .with_note("g(0) = 0, p(0) = 0, p nondecreasing on grid; local regularity of r, p, g assumed");
            r.evidence.grid = grid_name.into();
            r.evidence.points = grid.len();
            r
        };

        // (ii): σ(0) = 0, and σ² ≥ 0 so that σ exists.
        let s0 = self.sigma2.eval(0.0);
        let clause_ii = if s0.abs() > ZERO_TOL {
            ConditionReport::fails("EU(ii)", 0.0, -s0.abs(), Scope::Exact).with_note("σ(0) ≠ 0")
        } else {
            ConditionReport::from_margins(
                "EU(ii)",
                Scope::OnGrid,
                grid_name,
                grid.iter().map(|&x| (x, self.sigma2.eval(x))),
            )
            .with_note("σ(0) = 0 and σ² ≥ 0 (negative values mean no real diffusion coefficient)")
        };

        // (iii): ∫ z∧z² dπ < ∞, closed form per family.
        let m = self.pi.z_wedge_z2();
        let clause_iii = if m.is_finite() {
            ConditionReport::holds("EU(iii)", Scope::Exact).with_witness("z_wedge_z2_moment", m)
        } else {
            ConditionReport::fails("EU(iii)", f64::INFINITY, f64::NEG_INFINITY, Scope::Exact)
                .with_note("π lacks finite z∧z² moment")
        };

        // (iv): r − q ≤ r₁x^γ + r₂.
        let clause_iv = match self.eu_growth_bound() {
            Some((r1, r2, gamma)) => ConditionReport::from_margins(
                "EU(iv)",
                Scope::OnGrid,
                grid_name,
                grid.iter().map(|&x| {
                    let bound = r1 * x.powf(gamma) + r2;
                    // Equality cases (bound built from the same coefficients) must not fail on rounding.
                    (x, bound - self.net_rate(x) + 1e-12 * bound.abs().max(1.0))
                }),
            )
            .with_witness("r1", r1)
            .with_witness("r2", r2)
            .with_witness("gamma", gamma),
            None => ConditionReport::not_applicable("EU(iv)", "not established: r or q outside the closed-form families"),
        };

        let clause_v = ConditionReport::not_applicable(
            "EU(v)",
            "not machine-checkable: requires an approximating sequence h_n → x^γ with no constructive recipe",
        );

        let clauses = vec![clause_i, clause_ii, clause_iii, clause_iv, clause_v];
        let verdict = match clauses.iter().find(|c| c.is_failing()) {
            Some(c) => c.verdict.clone(),
            None => Verdict::HoldsOnGrid,
        };
        let mut report = ConditionReport::new("EU", verdict, Scope::OnGrid)
            .with_note("EU(v) is reported, not checked");
        report.clauses = clauses;
        report
    }

    /// (r₁, r₂, γ) with r − q ≤ r₁x^γ + r₂, derived from the family coefficients.
    fn eu_growth_bound(&self) -> Option<(f64, f64, f64)> {
        if let Some([c0, c1, c2]) = self.r.polynomial() {
            // q is nonnegative, so subtracting its polynomial part only helps when it is known.
            let [d0, d1, d2] = self.q.polynomial().unwrap_or([0.0; 3]);
            let (e0, e1, e2) = (c0 - d0, c1 - d1, c2 - d2);
            let pos = |v: f64| v.max(0.0);
            return Some(if e2 > 0.0 {
                (e2 + pos(e1), pos(e0) + pos(e1), 2.0)
            } else if e1 > 0.0 {
                (e1, pos(e0), 1.0)
            } else {
                (0.0, pos(e0), 0.0)
            });
        }
        match self.r {
            FunctionSpec::Power { a, b } if b >= 0.0 => Some((a.max(0.0), 0.0, b)),
            _ => None,
        }
    }
}

fn first_decrease(f: &FunctionSpec, grid: &[f64]) -> Option<f64> {
    grid.windows(2).find_map(|w| {
        let (a, b) = (f.eval(w[0]), f.eval(w[1]));
        (b < a - 1e-12 * a.abs().max(1.0)).then_some(w[0])
    })
}

/// Parameters of the affine running-example family:
/// g = α_g x, σ² = α_σ x² + β_σ x, r = αx + β, q = α_q x + β_q, no jumps, halving kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningExample {
    pub alpha_g: f64,
    pub alpha_sigma: f64,
    pub beta_sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_q: f64,
    pub beta_q: f64,
}

impl RunningExample {
    /// α_g = 2, α_σ = 1, β_σ = 0, α = β = 1, α_q = 0, β_q = 1/2.
    pub fn standard() -> Self {
        RunningExample {
            alpha_g: 2.0,
            alpha_sigma: 1.0,
            beta_sigma: 0.0,
            alpha: 1.0,
            beta: 1.0,
            alpha_q: 0.0,
            beta_q: 0.5,
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec::default()
            .with_g(FunctionSpec::affine(self.alpha_g, 0.0))
            .with_sigma2(FunctionSpec::quadratic_affine(self.alpha_sigma, self.beta_sigma))
            .with_r(FunctionSpec::affine(self.alpha, self.beta))
            .with_q(FunctionSpec::affine(self.alpha_q, self.beta_q))
    }

    /// Reads the family parameters back from a spec, when it belongs to the family.
    pub fn from_spec(spec: &ModelSpec) -> Option<Self> {
        let [g0, alpha_g, g2] = spec.g.polynomial()?;
        let [s0, beta_sigma, alpha_sigma] = spec.sigma2.polynomial()?;
        let (alpha, beta) = spec.r.affine_coefficients()?;
        let (alpha_q, beta_q) = spec.q.affine_coefficients()?;
        let no_jumps = spec.p.is_identically_zero() && !spec.stable.is_enabled();
        (g0 == 0.0 && g2 == 0.0 && s0 == 0.0 && no_jumps && spec.kappa == KernelSpec::DiracHalf).then_some(
            RunningExample { alpha_g, alpha_sigma, beta_sigma, alpha, beta, alpha_q, beta_q },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example_passes_eu() {
        let spec = RunningExample::standard().to_spec().validated().unwrap();
        let eu = spec.validate_assumption_eu();
        for name in ["EU(i)", "EU(ii)", "EU(iii)", "EU(iv)"] {
            assert!(eu.clause(name).unwrap().is_holding(), "{name}");
        }
        assert_eq!(eu.clause("EU(iv)").unwrap().witnesses["gamma"], 1.0);
        assert_eq!(eu.clause("EU(v)").unwrap().verdict, Verdict::NotApplicable);
        assert!(eu.is_holding());
    }

    #[test]
    fn nonzero_p_at_origin_fails_clause_one() {
        let spec = RunningExample::standard().to_spec().with_p(FunctionSpec::affine(1.0, 1.0));
        assert!(spec.validate().is_err());
        let eu = spec.validate_assumption_eu();
        assert!(eu.clause("EU(i)").unwrap().is_failing());
        assert!(eu.is_failing());
    }

    #[test]
    fn negative_diffusion_fails_clause_two() {
        let spec = RunningExample::standard().to_spec().with_sigma2(FunctionSpec::affine(-1.0, 0.0));
        assert!(spec.validate_assumption_eu().clause("EU(ii)").unwrap().is_failing());
    }

    #[test]
    fn family_round_trip() {
        let re = RunningExample::standard();
        assert_eq!(RunningExample::from_spec(&re.to_spec()), Some(re));
    }
}

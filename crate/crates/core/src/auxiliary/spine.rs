//! Single-path simulation of the spinal processes.
//!
//! Every variant is an Euler scheme on the same grid as the flow: drift, √(2σ²)ΔB,
//! positive jumps above ε, then multiplicative divisions y → θy drawn with rates frozen at
//! the start of the step. Loads are clamped at 0 and promoted to +∞ past the explosion cap.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::kernel_change::{kernel_change, Weight};
use super::LdcgCoefficients;
use crate::dynamics::{poisson, time_grid, IntegratorConfig, SmallJumpMode, Stepper};
use crate::model::{ModelSpec, SplitLaw};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum SpineVariant {
    /// Uniformly sampled lineage: the flow plus divisions at rate 2r with kernel κ.
    Uniform,
    /// Lineage biased by V(x) = x^α.
    Weighted { alpha: f64 },
    /// Y^(t): coefficients f1, f2, f3 evaluated at the time to go t − u.
    Inhomogeneous { horizon: f64 },
    /// Lower comparison process: drift gy, divisions at the envelope rate 2(αy+β).
    Tilde { horizon: f64 },
    /// Upper comparison process: drift ḡ_t, divisions at rate 2θβ.
    Bar { horizon: f64 },
    /// Upper comparison process: drift ĝ, divisions at rate 2θ(αy+β).
    Hat { horizon: f64 },
}

impl SpineVariant {
    pub fn label(&self) -> String {
        match self {
            SpineVariant::Uniform => "uniform".into(),
            SpineVariant::Weighted { alpha } => format!("weighted({alpha})"),
            SpineVariant::Inhomogeneous { horizon } => format!("inhomogeneous({horizon})"),
            SpineVariant::Tilde { horizon } => format!("tilde({horizon})"),
            SpineVariant::Bar { horizon } => format!("bar({horizon})"),
            SpineVariant::Hat { horizon } => format!("hat({horizon})"),
        }
    }

    /// Time after which the path is frozen (Y_s = Y_t for s ≥ t).
    pub fn freeze_time(&self) -> Option<f64> {
        match *self {
            SpineVariant::Uniform | SpineVariant::Weighted { .. } => None,
            SpineVariant::Inhomogeneous { horizon }
            | SpineVariant::Tilde { horizon }
            | SpineVariant::Bar { horizon }
            | SpineVariant::Hat { horizon } => Some(horizon),
        }
    }
}

/// Optional barriers c < y0 < b whose first grid crossing is recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Barriers {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuxiliaryPath {
    pub variant: SpineVariant,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// First grid time with Y ≤ c.
    pub tau_minus: Option<f64>,
    /// First grid time with Y ≥ b.
    pub tau_plus: Option<f64>,
    pub divisions: usize,
    pub positive_jumps: usize,
}

impl AuxiliaryPath {
    pub fn endpoint(&self) -> f64 {
        *self.values.last().expect("paths are nonempty")
    }

    /// Value at the last grid time ≤ t.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t + 1e-12);
        self.values[i.max(1) - 1]
    }

    /// min(τ⁻, τ⁺), or None when neither barrier was crossed.
    pub fn exit_time(&self) -> Option<f64> {
        match (self.tau_minus, self.tau_plus) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn to_csv(&self) -> String {
        let label = self.variant.label();
        let mut s = String::from("variant,time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            s += &format!("\"{label}\",{t},{v}\n");
        }
        s
    }
}

/// Moments of π restricted to z ≥ ε and z < ε, read once per run.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PiSplit {
    pub m0_tail: f64,
    pub m1_tail: f64,
    pub m2_tail: f64,
    pub m2_head: f64,
    pub m3_head: f64,
}

impl PiSplit {
    pub(crate) fn of(spec: &ModelSpec, eps: f64) -> PiSplit {
        if spec.p.is_identically_zero() || spec.pi.is_zero() {
            return PiSplit::default();
        }
        let pi = &spec.pi;
        PiSplit {
            m0_tail: pi.tail_mass(eps),
            m1_tail: pi.tail_moment(1.0, eps),
            m2_tail: pi.tail_moment(2.0, eps),
            m2_head: pi.head_moment(2.0, eps),
            m3_head: pi.head_moment(3.0, eps),
        }
    }

    pub(crate) fn active(&self) -> bool {
        self.m0_tail > 0.0 || self.m2_head > 0.0
    }
}

/// Draws from (1 + cz)π(dz) on [ε, ∞), normalized: a mixture of π and zπ.
pub(crate) fn sample_linear_tilt<R: Rng + ?Sized>(spec: &ModelSpec, split: &PiSplit, c: f64, eps: f64, rng: &mut R) -> f64 {
    let w0 = split.m0_tail;
    let w1 = c * split.m1_tail;
    if rng.random::<f64>() * (w0 + w1) < w0 {
        spec.pi.sample_tail(eps, rng)
    } else {
        spec.pi.sample_tail_size_biased(eps, rng)
    }
}

pub(crate) fn clamp_load(raw: f64, cap: f64) -> f64 {
    if raw < 0.0 {
        0.0
    } else if raw > cap || raw.is_nan() {
        f64::INFINITY
    } else {
        raw
    }
}

enum Dynamics<'a> {
    Uniform {
        stepper: Stepper<'a>,
    },
    Weighted {
        alpha: f64,
        rate_scale: f64,
        law: SplitLaw,
        split: PiSplit,
    },
    Ldcg {
        kind: LdcgKind,
        c: LdcgCoefficients<'a>,
        horizon: f64,
        c_t: f64,
        split: PiSplit,
        /// Law after the kernel change of the 2θ-weighted rates (bar, hat).
        tilted: SplitLaw,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LdcgKind {
    Exact,
    Tilde,
    Bar,
    Hat,
}

struct Runner<'a> {
    spec: &'a ModelSpec,
    cfg: IntegratorConfig,
    dyn_: Dynamics<'a>,
    divisions: usize,
    jumps: usize,
}

impl<'a> Runner<'a> {
    fn new(variant: SpineVariant, spec: &'a ModelSpec, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let eps = cfg.jump_trunc_eps;
        let dyn_ = match variant {
            SpineVariant::Uniform | SpineVariant::Weighted { alpha: 0.0 } => {
                Dynamics::Uniform { stepper: Stepper::new(spec, cfg) }
            }
            SpineVariant::Weighted { alpha } => {
                if spec.stable.is_enabled() {
                    return Err(Error::Precondition("weighted spines need stable jumps disabled".into()));
                }
                let split = PiSplit::of(spec, eps);
                if split.active() && alpha != 1.0 {
                    return Err(Error::Precondition(format!(
                        "weighted spine with π-jumps is implemented for α = 1 only, got α = {alpha}"
                    )));
                }
                let kc = kernel_change(&Weight::Power { alpha, scale: 1.0 }, &spec.kappa)?;
                Dynamics::Weighted { alpha, rate_scale: kc.rate_scale, law: kc.law, split }
            }
            SpineVariant::Inhomogeneous { horizon }
            | SpineVariant::Tilde { horizon }
            | SpineVariant::Bar { horizon }
            | SpineVariant::Hat { horizon } => {
                let kind = match variant {
                    SpineVariant::Inhomogeneous { .. } => LdcgKind::Exact,
                    SpineVariant::Tilde { .. } => LdcgKind::Tilde,
                    SpineVariant::Bar { .. } => LdcgKind::Bar,
                    _ => LdcgKind::Hat,
                };
                if !(horizon >= 0.0 && horizon.is_finite()) {
                    return Err(Error::Domain(format!("spine horizon must be finite and ≥ 0, got {horizon}")));
                }
                let c = LdcgCoefficients::from_spec(spec)?;
                let tilted = kernel_change(&Weight::Power { alpha: 1.0, scale: 2.0 }, &spec.kappa)?.law;
                Dynamics::Ldcg { kind, c_t: c.envelope_c(horizon), c, horizon, split: PiSplit::of(spec, eps), tilted }
            }
        };
        Ok(Runner { spec, cfg, dyn_, divisions: 0, jumps: 0 })
    }

    fn gaussian(&self) -> bool {
        self.cfg.small_jump_mode == SmallJumpMode::GaussianApprox
    }

    /// One step from time u.
    fn step<R: Rng + ?Sized>(&mut self, y: f64, u: f64, dt: f64, rng: &mut R) -> f64 {
        if y == 0.0 || y.is_infinite() || dt <= 0.0 {
            return y;
        }
        let spec = self.spec;
        let eps = self.cfg.jump_trunc_eps;
        let gaussian = self.gaussian();
        let cap = self.cfg.explosion_cap;
        let finish = |raw: f64| clamp_load(raw, cap);
        let (divisions, jumps) = (&mut self.divisions, &mut self.jumps);
        match &self.dyn_ {
            Dynamics::Uniform { stepper } => {
                let rate = 2.0 * spec.r.eval(y);
                let mut next = stepper.step(y, dt, rng);
                let n = poisson(rate * dt, rng);
                for _ in 0..n {
                    next *= spec.kappa.sample(rng);
                }
                *divisions += n as usize;
                next
            }
            Dynamics::Weighted { alpha, rate_scale, law, split } => {
                let s2 = spec.sigma2.eval(y);
                let mut raw = y + (spec.g.eval(y) + 2.0 * alpha * s2 / y) * dt;
                if s2 > 0.0 {
                    let z: f64 = StandardNormal.sample(rng);
                    raw += (2.0 * s2 * dt).sqrt() * z;
                }
                let py = spec.p.eval(y);
                if py > 0.0 && split.active() {
                    // Jumps at rate p(1 + z/y)π(dz), uncompensated; the V-transform leaves
                    // −p∫_{z≥ε} zπ + (p/y)∫_{z<ε} z²π in the drift.
                    raw += (-py * split.m1_tail + py / y * split.m2_head) * dt;
                    let n = poisson(py * (split.m0_tail + split.m1_tail / y) * dt, rng);
                    for _ in 0..n {
                        raw += sample_linear_tilt(spec, split, 1.0 / y, eps, rng);
                    }
                    *jumps += n as usize;
                    if gaussian {
                        let z: f64 = StandardNormal.sample(rng);
                        raw += (py * (split.m2_head + split.m3_head / y) * dt).sqrt() * z;
                    }
                }
                let mut next = finish(raw);
                let n = poisson(2.0 * spec.r.eval(y) * rate_scale * dt, rng);
                for _ in 0..n {
                    next *= law.sample(rng);
                }
                *divisions += n as usize;
                next
            }
            Dynamics::Ldcg { kind, c, horizon, c_t, split, tilted } => {
                if u >= *horizon {
                    return y;
                }
                let s = horizon - u;
                let drift = match kind {
                    LdcgKind::Exact => c.f1(y, s),
                    LdcgKind::Tilde => c.g * y,
                    LdcgKind::Bar => c.g_bar(y, *horizon),
                    LdcgKind::Hat => c.g_hat(y),
                };
                let s2 = spec.sigma2.eval(y);
                let mut raw = y + drift * dt;
                if s2 > 0.0 {
                    let z: f64 = StandardNormal.sample(rng);
                    raw += (2.0 * s2 * dt).sqrt() * z;
                }
                let py = spec.p.eval(y);
                if py > 0.0 && split.active() {
                    let k = c.f3_slope(y, s);
                    raw -= py * (split.m1_tail + k * split.m2_tail) * dt;
                    let n = poisson(py * (split.m0_tail + c_t * split.m1_tail) * dt, rng);
                    for _ in 0..n {
                        let z = sample_linear_tilt(spec, split, *c_t, eps, rng);
                        let h = rng.random::<f64>() * py * (1.0 + c_t * z);
                        if h <= c.f3(y, s, z) {
                            raw += z;
                            *jumps += 1;
                        }
                    }
                    if gaussian {
                        let z: f64 = StandardNormal.sample(rng);
                        raw += (py * (split.m2_head + k * split.m3_head).max(0.0) * dt).sqrt() * z;
                    }
                }
                let mut next = finish(raw);
                let envelope = 2.0 * (c.alpha * y + c.beta);
                match kind {
                    LdcgKind::Exact => {
                        let n = poisson(envelope * dt, rng);
                        for _ in 0..n {
                            let theta = spec.kappa.sample(rng);
                            if rng.random::<f64>() * envelope <= c.f2(y, s, theta) {
                                next *= theta;
                                *divisions += 1;
                            }
                        }
                    }
                    LdcgKind::Tilde => {
                        let n = poisson(envelope * dt, rng);
                        for _ in 0..n {
                            next *= spec.kappa.sample(rng);
                        }
                        *divisions += n as usize;
                    }
                    // ∫2θβ κ(dθ) = β and ∫2θ(αy+β) κ(dθ) = αy+β, with splits from 2θκ(dθ).
                    LdcgKind::Bar | LdcgKind::Hat => {
                        let rate = if *kind == LdcgKind::Bar { c.beta } else { c.alpha * y + c.beta };
                        let n = poisson(rate * dt, rng);
                        for _ in 0..n {
                            next *= tilted.sample(rng);
                        }
                        *divisions += n as usize;
                    }
                }
                next
            }
        }
    }
}

/// Path of `variant` from y0 on [0, horizon].
pub fn simulate_spine<R: Rng + ?Sized>(
    variant: SpineVariant,
    y0: f64,
    horizon: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> Result<AuxiliaryPath> {
    simulate_spine_on(variant, y0, &time_grid(0.0, horizon, cfg.dt, &[]), spec, cfg, Barriers::default(), rng)
}

/// Path on an explicit increasing grid starting at 0, recording barrier crossings.
pub fn simulate_spine_on<R: Rng + ?Sized>(
    variant: SpineVariant,
    y0: f64,
    grid: &[f64],
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    barriers: Barriers,
    rng: &mut R,
) -> Result<AuxiliaryPath> {
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(Error::Domain(format!("initial load must be finite and ≥ 0, got {y0}")));
    }
    let mut runner = Runner::new(variant, spec, *cfg)?;
    let mut path = AuxiliaryPath {
        variant,
        times: vec![grid[0]],
        values: vec![y0],
        tau_minus: None,
        tau_plus: None,
        divisions: 0,
        positive_jumps: 0,
    };
    let mut y = y0;
    mark(&mut path, barriers, grid[0], y);
    for w in grid.windows(2) {
        y = runner.step(y, w[0], w[1] - w[0], rng);
        path.times.push(w[1]);
        path.values.push(y);
        mark(&mut path, barriers, w[1], y);
    }
    path.divisions = runner.divisions;
    path.positive_jumps = runner.jumps;
    Ok(path)
}

fn mark(path: &mut AuxiliaryPath, barriers: Barriers, t: f64, y: f64) {
    if path.tau_minus.is_none() && barriers.lower.is_some_and(|c| y <= c) {
        path.tau_minus = Some(t);
    }
    if path.tau_plus.is_none() && barriers.upper.is_some_and(|b| y >= b) {
        path.tau_plus = Some(t);
    }
}

/// Steps a spine one grid interval at a time, for callers that accumulate path functionals.
pub struct SpineStepper<'a> {
    runner: Runner<'a>,
}

impl<'a> SpineStepper<'a> {
    pub fn new(variant: SpineVariant, spec: &'a ModelSpec, cfg: &IntegratorConfig) -> Result<Self> {
        Ok(SpineStepper { runner: Runner::new(variant, spec, *cfg)? })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, y: f64, u: f64, dt: f64, rng: &mut R) -> f64 {
        self.runner.step(y, u, dt, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_flow;
    use crate::model::{FunctionSpec, JumpMeasureSpec, KernelSpec, RunningExample};
    use crate::rng::seeded;

    #[test]
    fn uniform_spine_without_division_is_the_flow() {
        let mut spec = RunningExample::standard().to_spec();
        spec.r = FunctionSpec::zero();
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let flow = simulate_flow(1.0, 0.0, 1.0, &spec, &cfg, &mut seeded(4));
        let path = simulate_spine(SpineVariant::Uniform, 1.0, 1.0, &spec, &cfg, &mut seeded(4)).unwrap();
        assert_eq!(flow.values, path.values);
    }

    #[test]
    fn frozen_after_horizon() {
        let spec = ModelSpec::default()
            .with_g(FunctionSpec::linear(2.0))
            .with_sigma2(FunctionSpec::linear(0.5))
            .with_r(FunctionSpec::affine(1.0, 1.0))
            .with_q(FunctionSpec::constant(0.5));
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let p = simulate_spine(SpineVariant::Inhomogeneous { horizon: 0.5 }, 1.0, 1.0, &spec, &cfg, &mut seeded(2))
            .unwrap();
        let frozen = p.value_at(0.5);
        assert!(p.times.iter().zip(&p.values).filter(|(t, _)| **t >= 0.5).all(|(_, v)| *v == frozen));
    }

    #[test]
    fn weighted_needs_unit_alpha_with_jumps() {
        let spec = ModelSpec::default()
            .with_p(FunctionSpec::linear(1.0))
            .with_pi(JumpMeasureSpec::exponential(1.0, 1.0).unwrap());
        let cfg = IntegratorConfig::default();
        let err = simulate_spine(SpineVariant::Weighted { alpha: 0.5 }, 1.0, 0.1, &spec, &cfg, &mut seeded(0));
        assert!(matches!(err, Err(Error::Precondition(_))));
        assert!(simulate_spine(SpineVariant::Weighted { alpha: 1.0 }, 1.0, 0.1, &spec, &cfg, &mut seeded(0)).is_ok());
    }

    #[test]
    fn ldcg_variants_reject_g_equal_beta() {
        let spec = ModelSpec::default().with_g(FunctionSpec::linear(1.0)).with_r(FunctionSpec::affine(1.0, 1.0));
        let cfg = IntegratorConfig::default();
        let r = simulate_spine(SpineVariant::Hat { horizon: 1.0 }, 1.0, 1.0, &spec, &cfg, &mut seeded(0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn barrier_markers() {
        let spec = ModelSpec::default().with_g(FunctionSpec::linear(1.0)).with_kappa(KernelSpec::DiracHalf);
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let grid = time_grid(0.0, 2.0, 0.01, &[]);
        let b = Barriers { lower: Some(0.5), upper: Some(2.0) };
        let p = simulate_spine_on(SpineVariant::Uniform, 1.0, &grid, &spec, &cfg, b, &mut seeded(0)).unwrap();
        // y = 1.01^n crosses 2 at n = 70.
        assert!((p.tau_plus.unwrap() - 0.70).abs() < 1e-9);
        assert!(p.tau_minus.is_none());
    }
}

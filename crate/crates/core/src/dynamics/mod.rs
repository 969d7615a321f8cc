//! Euler–Maruyama integration of the single-cell load SDE.
//!
//! One step from x over dt:
//!
//! x′ = max(0, x + g(x)dt + √(2σ²(x))ΔB + J_π − p(x)·∫_{[ε,∞)} z π(dz)·dt + J_ρ)
//!
//! J_π is compound Poisson at rate p(x)·π([ε,∞)) with sizes from π on [ε,∞);
//! J_ρ is compound Poisson at rate x·ρ([ε,∞)) and is not compensated. Jumps
//! below ε are dropped, or replaced by a moment-matched Gaussian.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::{ModelSpec, StableJumpSpec};
use crate::{Error, Result};

/// Loads above this are promoted to +∞ and frozen.
pub const DEFAULT_EXPLOSION_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmallJumpMode {
    Neglect,
    GaussianApprox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub jump_trunc_eps: f64,
    pub small_jump_mode: SmallJumpMode,
    pub seed: u64,
    pub explosion_cap: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            jump_trunc_eps: 1e-3,
            small_jump_mode: SmallJumpMode::Neglect,
            seed: 0,
            explosion_cap: DEFAULT_EXPLOSION_CAP,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.jump_trunc_eps = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_small_jumps(mut self, mode: SmallJumpMode) -> Self {
        self.small_jump_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invariant(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.jump_trunc_eps > 0.0 && self.jump_trunc_eps.is_finite()) {
            return Err(Error::Invariant(format!("ε must be positive, got {}", self.jump_trunc_eps)));
        }
        if !(self.explosion_cap > 0.0) {
            return Err(Error::Invariant("explosion cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpSource {
    Pi,
    Stable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpMark {
    pub time: f64,
    pub size: f64,
    pub source: JumpSource,
}

/// What one step did, split by source.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepParts {
    /// Drift, diffusion, compensator and Gaussian refill.
    pub continuous: f64,
    pub pi_jumps: f64,
    pub stable_jumps: f64,
    /// Amount added by clamping the raw step at 0.
    pub clamp: f64,
}

/// Truncation constants of one (spec, ε) pair, computed once.
#[derive(Clone, Debug)]
pub struct Stepper<'a> {
    pub spec: &'a ModelSpec,
    pub cfg: IntegratorConfig,
    pi_tail_mass: f64,
    pi_tail_mean: f64,
    pi_head_var: f64,
    rho_tail_mass: f64,
    rho_head_mean: f64,
    rho_head_var: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(spec: &'a ModelSpec, cfg: IntegratorConfig) -> Self {
        let eps = cfg.jump_trunc_eps;
        let s = &spec.stable;
        let (rho_head_mean, rho_head_var) = if s.is_enabled() {
            // ∫_0^ε z ρ and ∫_0^ε z² ρ.
            (s.small_jump_mean(eps), s.scale * eps.powf(1.0 - s.b) / (1.0 - s.b))
        } else {
            (0.0, 0.0)
        };
        Stepper {
            spec,
            cfg,
            pi_tail_mass: spec.pi.tail_mass(eps),
            pi_tail_mean: spec.pi.tail_moment(1.0, eps),
            pi_head_var: spec.pi.head_moment(2.0, eps),
            rho_tail_mass: stable_tail_rate(1.0, s, eps),
            rho_head_mean,
            rho_head_var,
        }
    }

    pub fn pi_tail_mass(&self) -> f64 {
        self.pi_tail_mass
    }

    pub fn pi_tail_mean(&self) -> f64 {
        self.pi_tail_mean
    }

    /// One Euler step of length `dt`; jump sizes are passed to `on_jump`.
    pub fn step_with<R: Rng + ?Sized, J: FnMut(f64, JumpSource)>(
        &self,
        x: f64,
        dt: f64,
        rng: &mut R,
        mut on_jump: J,
    ) -> (f64, StepParts) {
        let mut parts = StepParts::default();
        if x == 0.0 || x.is_infinite() || dt <= 0.0 {
            return (x, parts);
        }
        let spec = self.spec;
        let eps = self.cfg.jump_trunc_eps;
        let gaussian = self.cfg.small_jump_mode == SmallJumpMode::GaussianApprox;

        let mut cont = spec.g.eval(x) * dt;
        let s2 = spec.sigma2.eval(x);
        if s2 > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            cont += (2.0 * s2 * dt).sqrt() * z;
        }

        let px = spec.p.eval(x);
        if px > 0.0 {
            cont -= px * self.pi_tail_mean * dt;
            let n = poisson(px * self.pi_tail_mass * dt, rng);
            for _ in 0..n {
                let z = spec.pi.sample_tail(eps, rng);
                parts.pi_jumps += z;
                on_jump(z, JumpSource::Pi);
            }
            if gaussian && self.pi_head_var > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                cont += (px * self.pi_head_var * dt).sqrt() * z;
            }
        }

        if self.rho_tail_mass > 0.0 {
            let n = poisson(x * self.rho_tail_mass * dt, rng);
            for _ in 0..n {
                let z = spec.stable.sample_tail(eps, rng);
                parts.stable_jumps += z;
                on_jump(z, JumpSource::Stable);
            }
            if gaussian {
                // Uncompensated small jumps: refill their mean and variance.
                let z: f64 = StandardNormal.sample(rng);
                cont += x * self.rho_head_mean * dt + (x * self.rho_head_var * dt).sqrt() * z;
            }
        }

        parts.continuous = cont;
        let raw = x + cont + parts.pi_jumps + parts.stable_jumps;
        let next = if raw < 0.0 {
            parts.clamp = -raw;
            0.0
        } else if raw > self.cfg.explosion_cap || raw.is_nan() {
            f64::INFINITY
        } else {
            raw
        };
        (next, parts)
    }

    pub fn step<R: Rng + ?Sized>(&self, x: f64, dt: f64, rng: &mut R) -> f64 {
        self.step_with(x, dt, rng, |_, _| {}).0
    }
}

/// Poisson draw; inversion for small means keeps the common zero-jump case cheap.
pub fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    if lambda < 30.0 {
        let mut p = (-lambda).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf && k < 1000 {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        k
    } else {
        Poisson::new(lambda).expect("finite positive mean").sample(rng) as u64
    }
}

/// One Euler–Maruyama step of the flow.
pub fn flow_step<R: Rng + ?Sized>(
    x: f64,
    _s: f64,
    dt: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> f64 {
    Stepper::new(spec, *cfg).step(x, dt, rng)
}

/// ρ([ε,∞)) scaled by the load: x·scale·ε^(−1−𝔟)/(1+𝔟).
pub fn stable_tail_rate(x: f64, stable: &StableJumpSpec, eps: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x * stable.tail_mass(eps)
}

/// Pareto draw on [ε,∞) with tail index 1+𝔟.
pub fn sample_stable_jump<R: Rng + ?Sized>(stable: &StableJumpSpec, eps: f64, rng: &mut R) -> f64 {
    stable.sample_tail(eps, rng)
}

/// Grid s, s+dt, s+2dt, … merged with the extra times in (s, t), ending exactly at t.
pub fn time_grid(s: f64, t: f64, dt: f64, extra: &[f64]) -> Vec<f64> {
    let mut grid = vec![s];
    if t <= s {
        return grid;
    }
    let mut extra: Vec<f64> = extra.iter().copied().filter(|&e| e > s && e < t).collect();
    extra.sort_by(f64::total_cmp);
    let mut ei = 0;
    let mut k = 1u64;
    loop {
        let next = s + k as f64 * dt;
        let stop = next >= t - 1e-9 * dt;
        let upto = if stop { t } else { next };
        while ei < extra.len() && extra[ei] < upto - 1e-12 {
            if extra[ei] > *grid.last().unwrap() + 1e-12 {
                grid.push(extra[ei]);
            }
            ei += 1;
        }
        grid.push(upto);
        if stop {
            return grid;
        }
        k += 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraitTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jump_marks: Vec<JumpMark>,
    /// Sum of drift, diffusion, compensator and refill increments.
    pub continuous_total: f64,
    /// Total mass added by clamping at 0, and how often it happened.
    pub clamp_total: f64,
    pub clamp_events: usize,
}

impl TraitTrajectory {
    pub fn endpoint(&self) -> f64 {
        *self.values.last().expect("trajectories are nonempty")
    }

    /// x₀ + continuous increments + jumps + clamp corrections; equals the
    /// endpoint up to rounding when the path stayed finite.
    pub fn reconstructed_endpoint(&self) -> f64 {
        self.values[0]
            + self.continuous_total
            + self.jump_marks.iter().map(|m| m.size).sum::<f64>()
            + self.clamp_total
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            s += &format!("{t},{v}\n");
        }
        s
    }
}

/// The flow Φ(x, s, ·) on [s, t].
pub fn simulate_flow<R: Rng + ?Sized>(
    x: f64,
    s: f64,
    t: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> TraitTrajectory {
    simulate_flow_on(x, &time_grid(s, t, cfg.dt, &[]), spec, cfg, rng)
}

/// The flow on an explicit increasing grid.
pub fn simulate_flow_on<R: Rng + ?Sized>(
    x: f64,
    grid: &[f64],
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> TraitTrajectory {
    let stepper = Stepper::new(spec, *cfg);
    let mut traj = TraitTrajectory {
        times: vec![grid[0]],
        values: vec![x],
        jump_marks: Vec::new(),
        continuous_total: 0.0,
        clamp_total: 0.0,
        clamp_events: 0,
    };
    let mut cur = x;
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let marks = &mut traj.jump_marks;
        let (next, parts) = stepper.step_with(cur, t1 - t0, rng, |size, source| {
            marks.push(JumpMark { time: t1, size, source })
        });
        traj.continuous_total += parts.continuous;
        if parts.clamp > 0.0 {
            traj.clamp_total += parts.clamp;
            traj.clamp_events += 1;
        }
        cur = next;
        traj.times.push(t1);
        traj.values.push(cur);
    }
    traj
}

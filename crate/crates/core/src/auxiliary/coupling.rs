//! The comparison processes Ỹ, Y^(t), Ȳ, Ŷ driven by one Brownian motion and one pair of
//! Poisson point measures.
//!
//! Division points (h, θ) come from a PPM with intensity Λ·dh/Λ ⊗ κ(dθ) on [0, Λ], where Λ is
//! the largest envelope 2(αy+β) among the four states; a process divides at a point when h
//! lies below its own rate. Positive jumps use the same construction with the envelope
//! max_i p(y_i)(1 + c_t z)π(dz) on z ≥ ε, each process accepting when h ≤ f3(y_i, t−u, z).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::spine::{clamp_load, sample_linear_tilt, PiSplit};
use super::LdcgCoefficients;
use crate::dynamics::{poisson, time_grid, IntegratorConfig, SmallJumpMode};
use crate::model::ModelSpec;
use crate::rng::replicate_stream;
use crate::{Error, Result};

/// Order slack for rounding: a ≤ b is accepted when a ≤ b + 1e-12·max(1, |b|).
const ORDER_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Tilde,
    Exact,
    Bar,
    Hat,
}

const ROLES: [Role; 4] = [Role::Tilde, Role::Exact, Role::Bar, Role::Hat];

#[derive(Clone, Debug, Serialize)]
pub struct SandwichPath {
    pub times: Vec<f64>,
    pub tilde: Vec<f64>,
    pub exact: Vec<f64>,
    pub bar: Vec<f64>,
    pub hat: Vec<f64>,
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + ORDER_SLACK * b.abs().max(1.0)
}

impl SandwichPath {
    /// Grid times at which Ỹ ≤ Y^(t) ≤ Ŷ fails.
    pub fn hat_violations(&self) -> usize {
        (0..self.times.len())
            .filter(|&i| !(leq(self.tilde[i], self.exact[i]) && leq(self.exact[i], self.hat[i])))
            .count()
    }

    /// Grid times at which Y^(t) ≤ Ȳ fails.
    pub fn bar_violations(&self) -> usize {
        (0..self.times.len()).filter(|&i| !leq(self.exact[i], self.bar[i])).count()
    }

    /// Largest excess of a lower process over an upper one in the Ỹ ≤ Y ≤ Ŷ chain.
    pub fn worst_gap(&self) -> f64 {
        (0..self.times.len())
            .map(|i| (self.tilde[i] - self.exact[i]).max(self.exact[i] - self.hat[i]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Coupled<'a> {
    spec: &'a ModelSpec,
    c: LdcgCoefficients<'a>,
    horizon: f64,
    c_t: f64,
    split: PiSplit,
    eps: f64,
    gaussian: bool,
    cap: f64,
}

impl Coupled<'_> {
    fn drift(&self, role: Role, y: f64, s: f64) -> f64 {
        match role {
            Role::Tilde => self.c.g * y,
            Role::Exact => self.c.f1(y, s),
            Role::Bar => self.c.g_bar(y, self.horizon),
            Role::Hat => self.c.g_hat(y),
        }
    }

    fn division_rate(&self, role: Role, y: f64, s: f64, theta: f64) -> f64 {
        let (alpha, beta) = (self.c.alpha, self.c.beta);
        match role {
            Role::Tilde => 2.0 * (alpha * y + beta),
            Role::Exact => self.c.f2(y, s, theta),
            Role::Bar => 2.0 * theta * beta,
            Role::Hat => 2.0 * theta * (alpha * y + beta),
        }
    }

    fn step<R: Rng + ?Sized>(&self, ys: &mut [f64; 4], u: f64, dt: f64, rng: &mut R) {
        if u >= self.horizon {
            return;
        }
        let s = self.horizon - u;
        let spec = self.spec;
        let z_b: f64 = StandardNormal.sample(rng);
        let z_head: f64 = if self.gaussian { StandardNormal.sample(rng) } else { 0.0 };
        let live = |y: f64| y > 0.0 && y.is_finite();

        let mut raw = [0.0; 4];
        for (k, &role) in ROLES.iter().enumerate() {
            let y = ys[k];
            if !live(y) {
                raw[k] = y;
                continue;
            }
            let mut v = y + self.drift(role, y, s) * dt + (2.0 * spec.sigma2.eval(y) * dt).sqrt() * z_b;
            let py = spec.p.eval(y);
            if py > 0.0 && self.split.active() {
                let slope = self.c.f3_slope(y, s);
                v -= py * (self.split.m1_tail + slope * self.split.m2_tail) * dt;
                if self.gaussian {
                    v += (py * (self.split.m2_head + slope * self.split.m3_head).max(0.0) * dt).sqrt() * z_head;
                }
            }
            raw[k] = v;
        }

        // Shared positive-jump points.
        let p_max = ys.iter().filter(|y| live(**y)).map(|&y| spec.p.eval(y)).fold(0.0, f64::max);
        if p_max > 0.0 && self.split.m0_tail > 0.0 {
            let n = poisson(p_max * (self.split.m0_tail + self.c_t * self.split.m1_tail) * dt, rng);
            for _ in 0..n {
                let z = sample_linear_tilt(spec, &self.split, self.c_t, self.eps, rng);
                let h = rng.random::<f64>() * p_max * (1.0 + self.c_t * z);
                for k in 0..4 {
                    if live(ys[k]) && h <= self.c.f3(ys[k], s, z) {
                        raw[k] += z;
                    }
                }
            }
        }

        let mut next = raw.map(|v| clamp_load(v, self.cap));

        // Shared division points; rates frozen at the start of the step.
        let env = ys
            .iter()
            .filter(|y| live(**y))
            .map(|&y| 2.0 * (self.c.alpha * y + self.c.beta))
            .fold(0.0, f64::max);
        let n = poisson(env * dt, rng);
        for _ in 0..n {
            let h = rng.random::<f64>() * env;
            let theta = spec.kappa.sample(rng);
            for (k, &role) in ROLES.iter().enumerate() {
                if live(ys[k]) && h <= self.division_rate(role, ys[k], s, theta) {
                    next[k] *= theta;
                }
            }
        }
        *ys = next;
    }
}

/// One coupled replicate of (Ỹ, Y^(t), Ȳ, Ŷ) on [0, horizon], all started at y0.
pub fn simulate_sandwich<R: Rng + ?Sized>(
    y0: f64,
    horizon: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    rng: &mut R,
) -> Result<SandwichPath> {
    cfg.validate()?;
    if !(y0 > 0.0 && y0.is_finite()) {
        return Err(Error::Domain(format!("sandwich start must be positive and finite, got {y0}")));
    }
    let c = LdcgCoefficients::from_spec(spec)?;
    let coupled = Coupled {
        spec,
        c_t: c.envelope_c(horizon),
        c,
        horizon,
        split: PiSplit::of(spec, cfg.jump_trunc_eps),
        eps: cfg.jump_trunc_eps,
        gaussian: cfg.small_jump_mode == SmallJumpMode::GaussianApprox,
        cap: cfg.explosion_cap,
    };
    let grid = time_grid(0.0, horizon, cfg.dt, &[]);
    let mut out = SandwichPath {
        times: grid.clone(),
        tilde: vec![y0],
        exact: vec![y0],
        bar: vec![y0],
        hat: vec![y0],
    };
    let mut ys = [y0; 4];
    for w in grid.windows(2) {
        coupled.step(&mut ys, w[0], w[1] - w[0], rng);
        out.tilde.push(ys[0]);
        out.exact.push(ys[1]);
        out.bar.push(ys[2]);
        out.hat.push(ys[3]);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichSummary {
    pub replicates: usize,
    /// Replicates with at least one grid time where Ỹ ≤ Y^(t) ≤ Ŷ fails.
    pub violating_replicates: usize,
    /// Replicates with at least one grid time where Y^(t) ≤ Ȳ fails.
    pub bar_violating_replicates: usize,
    pub worst_gap: f64,
}

impl SandwichSummary {
    pub fn ordered_replicates(&self) -> usize {
        self.replicates - self.violating_replicates
    }
}

/// Runs `reps` coupled replicates on the streams of `experiment` and tallies order violations.
pub fn sandwich_summary(
    y0: f64,
    horizon: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    reps: usize,
    master_seed: u64,
    experiment: &str,
) -> Result<SandwichSummary> {
    let paths: Vec<(usize, usize, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_stream(master_seed, experiment, i);
            simulate_sandwich(y0, horizon, spec, cfg, &mut rng)
                .map(|p| (p.hat_violations(), p.bar_violations(), p.worst_gap()))
        })
        .collect::<Result<_>>()?;
    Ok(SandwichSummary {
        replicates: reps,
        violating_replicates: paths.iter().filter(|p| p.0 > 0).count(),
        bar_violating_replicates: paths.iter().filter(|p| p.1 > 0).count(),
        worst_gap: paths.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionSpec, KernelSpec};
    use crate::rng::seeded;

    #[test]
    fn noiseless_halving_keeps_the_order() {
        let spec = ModelSpec::default()
            .with_g(FunctionSpec::linear(0.5))
            .with_r(FunctionSpec::affine(1.0, 1.0))
            .with_q(FunctionSpec::constant(0.2))
            .with_kappa(KernelSpec::DiracHalf);
        let cfg = IntegratorConfig::default().with_dt(1e-3);
        for seed in 0..20 {
            let p = simulate_sandwich(1.0, 1.0, &spec, &cfg, &mut seeded(seed)).unwrap();
            assert_eq!(p.hat_violations(), 0, "seed {seed}");
        }
    }

    #[test]
    fn paths_start_together() {
        let spec = ModelSpec::default()
            .with_g(FunctionSpec::linear(2.0))
            .with_sigma2(FunctionSpec::linear(0.3))
            .with_r(FunctionSpec::affine(1.0, 1.0))
            .with_q(FunctionSpec::constant(0.5));
        let p = simulate_sandwich(2.0, 0.5, &spec, &IntegratorConfig::default(), &mut seeded(1)).unwrap();
        assert_eq!((p.tilde[0], p.exact[0], p.hat[0], p.bar[0]), (2.0, 2.0, 2.0, 2.0));
        assert_eq!(p.times.len(), p.hat.len());
    }
}

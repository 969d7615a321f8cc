//! Monte Carlo check that Z^(a)_{t∧T} = Y_{t∧T}^{1−a}·exp(∫₀^{t∧T} G_a(Y_s) ds) has constant mean.
//!
//! T = τ⁻(c) ∧ τ⁺(b) is read off the simulation grid, so the stopped value overshoots the
//! barrier by at most one step; the integral uses the left-point rule.

use rayon::prelude::*;
use serde::Serialize;

use super::spine::{SpineStepper, SpineVariant};
use crate::analysis::GaEvaluator;
use crate::dynamics::{time_grid, IntegratorConfig};
use crate::model::ModelSpec;
use crate::rng::StreamSource;
use crate::stats::Estimate;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleRow {
    pub t: f64,
    pub estimate: Estimate,
    /// Fraction of replicates stopped by a barrier by time t.
    pub stopped: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleTable {
    pub a: f64,
    pub y0: f64,
    /// y0^{1−a}, the common mean of every row.
    pub reference: f64,
    pub rows: Vec<MartingaleRow>,
}

impl MartingaleTable {
    /// Every row within k standard errors of y0^{1−a}; rows with zero SE must match exactly.
    pub fn is_constant(&self, k: f64) -> bool {
        self.rows.iter().all(|r| r.estimate.within(self.reference, k))
    }

    /// Largest |row − y0^{1−a}| in units of that row's SE (0 for exact rows that match).
    pub fn worst_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let d = (r.estimate.mean - self.reference).abs();
                if d == 0.0 {
                    0.0
                } else {
                    d / r.estimate.se
                }
            })
            .fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn martingale_diagnostic(
    a: f64,
    y0: f64,
    c: f64,
    b: f64,
    t_grid: &[f64],
    spec: &ModelSpec,
    n_reps: usize,
    cfg: &IntegratorConfig,
    source: &StreamSource,
) -> Result<MartingaleTable> {
    if !(a > 0.0 && a != 1.0) {
        return Err(Error::Precondition(format!("a must lie in (0,1) or (1,∞), got {a}")));
    }
    if a > 1.0 && !spec.kappa.moment(1.0 - a).is_ok_and(f64::is_finite) {
        return Err(Error::Precondition(format!("E[Θ^{}] is infinite", 1.0 - a)));
    }
    if !(0.0 < c && c < y0 && y0 < b) {
        return Err(Error::Precondition(format!("barriers need 0 < c < y0 < b, got c={c}, y0={y0}, b={b}")));
    }
    if n_reps < 2 {
        return Err(Error::Precondition("at least two replicates are needed".into()));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Precondition("time grid entries must be finite and ≥ 0".into()));
    }
    let ga = GaEvaluator::new(a, spec)?;
    // Fail early instead of inside the replicate loop.
    ga.eval(y0)?;
    let horizon = t_grid.iter().copied().fold(0.0, f64::max);
    let grid = time_grid(0.0, horizon, cfg.dt, t_grid);
    let exponent = 1.0 - a;

    let reps: Vec<Vec<(f64, bool)>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, bool)>> {
            let mut rng = source.stream(i);
            let mut stepper = SpineStepper::new(SpineVariant::Uniform, spec, cfg)?;
            let (mut y, mut integral, mut stopped) = (y0, 0.0, false);
            // (time, Z, stopped) at each requested time.
            let mut marks: Vec<(f64, f64, bool)> = Vec::with_capacity(t_grid.len());
            let mut capture = |t: f64, z: f64, stopped: bool| {
                for &tq in t_grid {
                    if (tq - t).abs() <= 1e-12 * tq.max(1.0) {
                        marks.push((tq, z, stopped));
                    }
                }
            };
            capture(0.0, y.powf(exponent), false);
            for w in grid.windows(2) {
                if !stopped {
                    let dt = w[1] - w[0];
                    integral += ga.eval(y)? * dt;
                    y = stepper.step(y, w[0], dt, &mut rng);
                    stopped = y <= c || y >= b;
                }
                capture(w[1], y.powf(exponent) * integral.exp(), stopped);
            }
            Ok(t_grid
                .iter()
                .map(|&tq| {
                    let m = marks.iter().find(|m| m.0 == tq).expect("every requested time is on the grid");
                    (m.1, m.2)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let rows = t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let xs: Vec<f64> = reps.iter().map(|r| r[j].0).collect();
            let stopped = reps.iter().filter(|r| r[j].1).count() as f64 / n_reps as f64;
            MartingaleRow { t, estimate: Estimate::from_samples(&xs), stopped }
        })
        .collect();
    Ok(MartingaleTable { a, y0, reference: y0.powf(exponent), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionSpec, KernelSpec};

    fn vanishing_g2() -> ModelSpec {
        ModelSpec::default()
            .with_g(FunctionSpec::linear(2.0))
            .with_r(FunctionSpec::constant(1.0))
            .with_kappa(KernelSpec::DiracHalf)
    }

    #[test]
    fn time_zero_row_is_exact() {
        let src = StreamSource::new(1, "martingale-test");
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let t = martingale_diagnostic(2.0, 1.5, 0.1, 10.0, &[0.0], &vanishing_g2(), 4, &cfg, &src).unwrap();
        assert_eq!(t.rows[0].estimate.mean, 1.5f64.powf(-1.0));
        assert_eq!(t.rows[0].estimate.se, 0.0);
        assert!(t.is_constant(3.0));
    }

    #[test]
    fn barrier_order_is_checked() {
        let src = StreamSource::new(1, "m");
        let cfg = IntegratorConfig::default();
        let r = martingale_diagnostic(0.5, 1.0, 2.0, 3.0, &[0.0, 1.0], &vanishing_g2(), 10, &cfg, &src);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}

//! Foster–Lyapunov constants for V(x) = x under the time-inhomogeneous spine generator.

use serde::Serialize;

use crate::auxiliary::LdcgCoefficients;
use crate::model::{log_grid, ModelSpec};
use crate::{Error, Result};

/// Horizons t over which sup_{u ≤ t} of the drift is taken.
pub const LYAPUNOV_HORIZONS: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 50.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovConstants {
    pub a: f64,
    pub d: f64,
    /// Grid points x with the drift bound M(x) = sup_{t, u ≤ t} 𝒜V(x).
    pub grid: Vec<f64>,
    pub sup_drift: Vec<f64>,
}

impl LyapunovConstants {
    /// Largest value of M(x) + ax − d over the grid; ≤ 0 by construction.
    pub fn worst_gap(&self) -> f64 {
        self.grid
            .iter()
            .zip(&self.sup_drift)
            .map(|(x, m)| m + self.a * x - self.d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// x-grid: 0 together with a log grid on [10⁻⁶, 10⁴].
pub fn lyapunov_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(log_grid(1e-6, 1e4, 400));
    g
}

/// sup over t in the test horizons and u ∈ [0, t] of f1(x,u) − ∫ f2(x,u,θ)x(1−θ)κ(dθ).
pub fn sup_drift(c: &LdcgCoefficients, x: f64, theta_m2: f64, horizons: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &t in horizons {
        const STEPS: usize = 200;
        for i in 0..=STEPS {
            let u = t * i as f64 / STEPS as f64;
            best = best.max(c.lyapunov_drift(x, u, theta_m2));
        }
    }
    best
}

/// Finds (a, d) with 𝒜V(x) ≤ −ax + d on the grid, uniformly in the time-to-go.
///
/// The slope is read off the top of the grid: h = M(x_top)/x_top must be negative, then
/// a = min(1, −h/2) and d = 1.25·max_x(M(x) + ax) + 10⁻³. Fails with the violating x when the
/// drift does not eventually dominate a negative multiple of x.
pub fn lyapunov_search(spec: &ModelSpec) -> Result<LyapunovConstants> {
    let c = LdcgCoefficients::from_spec(spec)?;
    let theta_m2 = spec.kappa.moment(2.0)?;
    let grid = lyapunov_grid();
    let sup: Vec<f64> = grid.iter().map(|&x| sup_drift(&c, x, theta_m2, &LYAPUNOV_HORIZONS)).collect();
    let top = grid.len() - 1;
    let h = sup[top] / grid[top];
    if !(h < 0.0) {
        return Err(Error::NonConvergence(format!(
            "no Foster–Lyapunov slope: drift/x = {h:.4e} ≥ 0 at x = {:e}",
            grid[top]
        )));
    }
    let a = (-h / 2.0).min(1.0);
    let peak = grid.iter().zip(&sup).map(|(x, m)| m + a * x).fold(f64::NEG_INFINITY, f64::max);
    let d = 1.25 * peak.max(0.0) + 1e-3;
    Ok(LyapunovConstants { a, d, grid, sup_drift: sup })
}

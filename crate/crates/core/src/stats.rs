//! Sample statistics shared by the Monte Carlo estimators.

use serde::Serialize;

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// Estimate from samples summed in slice order, so results do not depend
    /// on how the samples were produced.
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Estimate { mean, se: 0.0, n };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Estimate { mean, se: (var / n as f64).sqrt(), n }
    }

    pub fn exact(value: f64) -> Estimate {
        Estimate { mean: value, se: 0.0, n: 1 }
    }

    /// Whether `reference` lies within `k` standard errors.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.se
    }

    /// Whether two independent estimates agree within `k` combined standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.se.hypot(other.se)
    }

    /// Product with a known constant.
    pub fn scaled(&self, c: f64) -> Estimate {
        Estimate { mean: self.mean * c, se: self.se * c.abs(), n: self.n }
    }
}

/// Ratio of means E[X]/E[Y] from paired samples, with a delta-method SE.
pub fn ratio_of_means(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len(), "paired samples required");
    let n = xs.len();
    let ex = Estimate::from_samples(xs);
    let ey = Estimate::from_samples(ys);
    let ratio = ex.mean / ey.mean;
    if n < 2 {
        return Estimate { mean: ratio, se: 0.0, n };
    }
    let resid: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - ratio * y).collect();
    let er = Estimate::from_samples(&resid);
    Estimate { mean: ratio, se: er.se / ey.mean.abs(), n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_has_zero_se() {
        let e = Estimate::from_samples(&[1.0; 10]);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn se_matches_hand_computation() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ratio_of_proportional_samples_is_exact() {
        let ys = [1.0, 2.0, 5.0];
        let xs: Vec<f64> = ys.iter().map(|y| 3.0 * y).collect();
        let r = ratio_of_means(&xs, &ys);
        assert!((r.mean - 3.0).abs() < 1e-15);
        assert!(r.se < 1e-15);
    }
}

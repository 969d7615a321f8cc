//! Which long-time results apply to the affine running-example family
//! g = α_g x, σ² = α_σx² + β_σx, r = αx + β, q = α_q x + β_q, κ = δ_{1/2}, no jumps.

use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;

use super::conditions::{EXPL_PROBES, EXT_PROBES};
use crate::model::RunningExample;

/// Long-time results, named by what they conclude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposition {
    /// Explosion assumption: no cell keeps a load below K.
    GlobalExplosion,
    /// Extinction assumption: no cell keeps a load above K.
    GlobalExtinction,
    /// Geometric loads, γ ∈ [0,1): explicit exponential bound on the fraction above K.
    GeometricDecayBound,
    /// Geometric loads, γ ∈ [0,1): the fraction above K vanishes as K grows.
    GeometricContainment,
    /// Geometric loads, γ > 1: the fraction below K vanishes as K shrinks.
    GeometricHighLoad,
    /// Parasite growth tied to death: no cells with very small loads.
    ProportionalBasalInfection,
    /// Parasite growth tied to death: the fraction above K vanishes as K grows.
    ProportionalContainment,
    /// Linear division: the fraction of very infected cells vanishes in probability.
    LinearDivisionContainment,
    /// Linear division with large noise at 0: the infected fraction vanishes in L².
    LinearDivisionRecovery,
    /// Linear division with small noise at 0: the load distribution stabilises.
    LinearDivisionStabilization,
}

impl Proposition {
    pub fn label(self) -> &'static str {
        match self {
            Proposition::GlobalExplosion => "global-explosion",
            Proposition::GlobalExtinction => "global-extinction",
            Proposition::GeometricDecayBound => "geometric-decay-bound",
            Proposition::GeometricContainment => "geometric-containment",
            Proposition::GeometricHighLoad => "geometric-high-load",
            Proposition::ProportionalBasalInfection => "proportional-basal-infection",
            Proposition::ProportionalContainment => "proportional-containment",
            Proposition::LinearDivisionContainment => "linear-division-containment",
            Proposition::LinearDivisionRecovery => "linear-division-recovery",
            Proposition::LinearDivisionStabilization => "linear-division-stabilization",
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An applicable result and the inequality that triggered it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Applicable {
    pub proposition: Proposition,
    pub trigger: String,
}

/// Best probe for a global assumption on the family: γ = max(0, β − β_q) is the smallest
/// admissible γ, and γ'_max is the largest γ' the family allows at that a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyWitness {
    pub a: f64,
    pub gamma: f64,
    pub gamma_prime_max: f64,
}

/// Probe sets for the global assumptions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub expl_probes: Vec<f64>,
    pub ext_probes: Vec<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { expl_probes: EXPL_PROBES.to_vec(), ext_probes: EXT_PROBES.to_vec() }
    }
}

/// Largest γ' with G_a ≥ γ' on (0, ∞) for a > 1. Requires α = 0 and β_σ = 0
/// (otherwise r or a·β_σ/x is unbounded against a bounded left side):
/// γ'_max = (a−1)α_g − a(a−1)α_σ − (2^a − 2)β.
pub fn expl_gamma_prime_max(p: &RunningExample, a: f64) -> Option<f64> {
    if !(a > 1.0) || p.alpha != 0.0 || p.beta_sigma != 0.0 {
        return None;
    }
    Some((a - 1.0) * p.alpha_g - a * (a - 1.0) * p.alpha_sigma - (2f64.powf(a) - 2.0) * p.beta)
}

/// Largest γ' with G_a ≥ γ' on (0, ∞) for a < 1: with k = (1−a)/(2−2^a), the family needs
/// αx + β + k·a·β_σ/x ≥ k[γ'/(1−a) + α_g − aα_σ], whose left side has minimum β + 2√(αkaβ_σ).
pub fn ext_gamma_prime_max(p: &RunningExample, a: f64) -> Option<f64> {
    if !(a < 1.0) {
        return None;
    }
    let k = (1.0 - a) / (2.0 - 2f64.powf(a));
    let coupling = a * p.beta_sigma;
    let s = if coupling > 0.0 && p.alpha > 0.0 {
        2.0 * (p.alpha * k * coupling).sqrt()
    } else if coupling < 0.0 {
        // a < 0 with β_σ > 0: k·a·β_σ/x → −∞ as x → 0.
        return None;
    } else {
        0.0
    };
    Some((2.0 - 2f64.powf(a)) * (p.beta + s - k * (p.alpha_g - a * p.alpha_sigma)))
}

fn best_probe(p: &RunningExample, probes: &[f64], f: impl Fn(&RunningExample, f64) -> Option<f64>) -> Option<FamilyWitness> {
    // q ≥ r − γ for all x ⇔ α_q ≥ α and γ ≥ β − β_q.
    if p.alpha_q < p.alpha {
        return None;
    }
    let gamma = (p.beta - p.beta_q).max(0.0);
    probes
        .iter()
        .filter_map(|&a| f(p, a).map(|g| FamilyWitness { a, gamma, gamma_prime_max: g }))
        .filter(|w| w.gamma_prime_max > w.gamma)
        .max_by(|x, y| x.gamma_prime_max.total_cmp(&y.gamma_prime_max))
}

pub fn expl_closed_form(p: &RunningExample, probes: &[f64]) -> Option<FamilyWitness> {
    best_probe(p, probes, expl_gamma_prime_max)
}

pub fn ext_closed_form(p: &RunningExample, probes: &[f64]) -> Option<FamilyWitness> {
    best_probe(p, probes, ext_gamma_prime_max)
}

/// Every result whose running-example criterion holds for `p`.
pub fn classify_running_example(p: &RunningExample, opts: &ClassifyOptions) -> Vec<Applicable> {
    let mut out = Vec::new();
    let mut add = |proposition, trigger: String| out.push(Applicable { proposition, trigger });

    if let Some(w) = expl_closed_form(p, &opts.expl_probes) {
        add(
            Proposition::GlobalExplosion,
            format!(
                "α = β_σ = 0, α_q ≥ α, and at a = {}: (a−1)α_g − a(a−1)α_σ − (2^a−2)β = {:.6} > γ = {:.6}",
                w.a, w.gamma_prime_max, w.gamma
            ),
        );
    }
    if let Some(w) = ext_closed_form(p, &opts.ext_probes) {
        add(
            Proposition::GlobalExtinction,
            format!(
                "α_q ≥ α and at a = {}: (2−2^a)[β + 2√(αkaβ_σ) − k(α_g − aα_σ)] = {:.6} > γ = {:.6}",
                w.a, w.gamma_prime_max, w.gamma
            ),
        );
    }

    // Geometric loads with γr − q constant.
    if p.alpha > 0.0 && p.beta_sigma == 0.0 {
        let gamma = p.alpha_q / p.alpha;
        if gamma < 1.0 {
            let lhs = p.alpha_sigma * (1.0 + gamma).ln();
            let rhs = p.alpha_g * LN_2;
            if lhs > rhs {
                add(Proposition::GeometricDecayBound, format!("γ = {gamma:.6} < 1, α_σ ln(1+γ) = {lhs:.6} > α_g ln 2 = {rhs:.6}"));
            } else {
                add(Proposition::GeometricContainment, format!("γ = {gamma:.6} < 1, α_σ ln(1+γ) = {lhs:.6} ≤ α_g ln 2 = {rhs:.6}"));
            }
        } else if gamma > 1.0 {
            let thr = p.alpha_sigma * (2.0 * (1.0 + gamma).ln() / LN_2 - 1.0) + p.beta * (1.0 + gamma) * LN_2;
            if p.alpha_g > thr {
                add(Proposition::GeometricHighLoad, format!("γ = {gamma:.6} > 1, α_g = {} > {thr:.6}", p.alpha_g));
            }
        }
    } else if p.alpha == 0.0 && p.beta_sigma == 0.0 && p.alpha_q == 0.0 {
        let upper = p.alpha_sigma + 2.0 * LN_2 * p.beta;
        if p.alpha_sigma > p.alpha_g {
            add(Proposition::GeometricDecayBound, format!("α = 0, α_σ = {} > α_g = {}", p.alpha_sigma, p.alpha_g));
        } else if p.alpha_g < upper {
            add(Proposition::GeometricContainment, format!("α = 0, α_σ ≤ α_g = {} < α_σ + 2β ln 2 = {upper:.6}", p.alpha_g));
        } else if p.alpha_g > upper {
            add(Proposition::GeometricHighLoad, format!("α = 0, α_g = {} > α_σ + 2β ln 2 = {upper:.6}", p.alpha_g));
        }
    }

    // Parasite growth tied to death: g/x − q constant ⇔ α_q = 0.
    if p.alpha_q == 0.0 {
        if p.alpha > 0.0 {
            add(Proposition::ProportionalContainment, "α_q = 0, α > 0: SN∞ and star3 hold".into());
            let thr = p.alpha_sigma + 1.5 * p.beta;
            if p.beta_sigma == 0.0 && p.alpha_g > thr {
                add(
                    Proposition::ProportionalBasalInfection,
                    format!("α_q = 0, β_σ = 0, α_g = {} > α_σ + 3β/2 = {thr:.6}", p.alpha_g),
                );
            }
        } else {
            let thr = p.beta * LN_2 - p.alpha_sigma;
            if p.alpha_g < thr {
                add(Proposition::ProportionalContainment, format!("α = α_q = 0, α_g = {} < β ln 2 − α_σ = {thr:.6}", p.alpha_g));
            }
        }
    }

    // Linear division: α > 0, β > 0, α_q = 0, max(α_g, β) > β_q.
    if p.alpha > 0.0 && p.beta > 0.0 && p.alpha_q == 0.0 && p.alpha_g.max(p.beta) > p.beta_q {
        let base = format!("α > 0, α_q = 0, max(α_g, β) = {} > β_q = {}", p.alpha_g.max(p.beta), p.beta_q);
        add(Proposition::LinearDivisionContainment, base.clone());
        if p.beta_sigma > 0.0 {
            add(Proposition::LinearDivisionRecovery, format!("{base}, β_σ > 0 gives LN0"));
        } else {
            add(Proposition::LinearDivisionStabilization, format!("{base}, β_σ = 0 gives SN0"));
        }
    }
    out
}

/// Parameter sets chosen so that exactly one result applies to each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonRedundancyPreset {
    pub name: &'static str,
    pub params: RunningExample,
    pub expected: Proposition,
}

pub fn non_redundancy_presets() -> Vec<NonRedundancyPreset> {
    vec![
        // α_q ≥ α > 0, β_σ > 0, β_q + γ > β ≥ max(k[γ'/(1−a) + α_g − aα_σ], α_g, β_q).
        NonRedundancyPreset {
            name: "ex-EXT",
            params: RunningExample {
                alpha_g: 0.5,
                alpha_sigma: 0.5,
                beta_sigma: 1.0,
                alpha: 1.0,
                beta: 1.0,
                alpha_q: 1.0,
                beta_q: 0.8,
            },
            expected: Proposition::GlobalExtinction,
        },
        // α > α_q > 0, β_σ = 0, α_g < β_q.
        NonRedundancyPreset {
            name: "ex-LGBE",
            params: RunningExample {
                alpha_g: 0.5,
                alpha_sigma: 1.0,
                beta_sigma: 0.0,
                alpha: 1.0,
                beta: 1.0,
                alpha_q: 0.5,
                beta_q: 1.0,
            },
            expected: Proposition::GeometricDecayBound,
        },
        // α > 0, α_q = 0; β_σ > 0 rules out the geometric case and β_q ≥ max(α_g, β) the
        // linear-division one.
        NonRedundancyPreset {
            name: "ex-PGCD",
            params: RunningExample {
                alpha_g: 0.5,
                alpha_sigma: 0.5,
                beta_sigma: 1.0,
                alpha: 1.0,
                beta: 0.5,
                alpha_q: 0.0,
                beta_q: 1.0,
            },
            expected: Proposition::ProportionalContainment,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_trigger_exactly_their_result() {
        for preset in non_redundancy_presets() {
            let got = classify_running_example(&preset.params, &ClassifyOptions::default());
            let labels: Vec<_> = got.iter().map(|a| a.proposition).collect();
            assert_eq!(labels, vec![preset.expected], "{}", preset.name);
        }
    }

    #[test]
    fn decay_bound_bullet() {
        let mut p = RunningExample::standard();
        p.alpha_q = 0.5; // γ = 1/2
        p.alpha_sigma = 3.0;
        p.alpha_g = 1.0;
        let got = classify_running_example(&p, &ClassifyOptions::default());
        assert!(got.iter().any(|a| a.proposition == Proposition::GeometricDecayBound));
    }

    #[test]
    fn explosion_needs_constant_division() {
        let mut p = RunningExample { alpha_g: 3.0, alpha_sigma: 0.0, beta_sigma: 0.0, alpha: 0.0, beta: 1.0, alpha_q: 0.0, beta_q: 0.5 };
        assert!(expl_closed_form(&p, &EXPL_PROBES).is_some());
        p.alpha = 0.1;
        assert!(expl_closed_form(&p, &EXPL_PROBES).is_none());
    }
}

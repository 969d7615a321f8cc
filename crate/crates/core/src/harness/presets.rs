//! Named model presets used by the experiment registry and the CLI.

use serde::Serialize;

use crate::analysis::non_redundancy_presets;
use crate::model::{to_toml, FunctionSpec, JumpMeasureSpec, KernelSpec, ModelSpec, RunningExample};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: String,
    pub summary: String,
    /// Initial load of the root cell.
    pub x0: f64,
    #[serde(skip)]
    pub spec: ModelSpec,
}

impl Preset {
    pub fn config_text(&self) -> String {
        to_toml(&self.spec)
    }
}

fn preset(name: &str, summary: &str, x0: f64, spec: ModelSpec) -> Preset {
    Preset { name: name.into(), summary: summary.into(), x0, spec }
}

fn running(alpha_g: f64, alpha_sigma: f64, beta_sigma: f64, alpha: f64, beta: f64, alpha_q: f64, beta_q: f64) -> ModelSpec {
    RunningExample { alpha_g, alpha_sigma, beta_sigma, alpha, beta, alpha_q, beta_q }.to_spec()
}

/// Every built-in preset, in display order.
pub fn presets() -> Vec<Preset> {
    let mut out = vec![
        preset(
            "ldcg",
            "g(x)=2x, r(x)=x+1, q=0.5, no noise: closed-form E[N_t] and E[N_t^2]",
            1.0,
            ModelSpec::default()
                .with_g(FunctionSpec::linear(2.0))
                .with_r(FunctionSpec::affine(1.0, 1.0))
                .with_q(FunctionSpec::constant(0.5)),
        ),
        preset(
            "ldcg-division-led",
            "g(x)=0.2x, r(x)=0.5x+1, q=0: beta > max(g,q), for the large-t second-moment ratio",
            1.0,
            ModelSpec::default()
                .with_g(FunctionSpec::linear(0.2))
                .with_r(FunctionSpec::affine(0.5, 1.0))
                .with_q(FunctionSpec::constant(0.0)),
        ),
        preset(
            "ldcg-plus-plus",
            "ldcg with Feller noise sigma2(x)=x/2 and jumps p(x)=x, pi=Exp(2): comparison-process coupling",
            1.0,
            ModelSpec::default()
                .with_g(FunctionSpec::linear(2.0))
                .with_sigma2(FunctionSpec::linear(0.5))
                .with_p(FunctionSpec::linear(1.0))
                .with_pi(JumpMeasureSpec::Exponential { mass: 1.0, rate: 2.0 })
                .with_r(FunctionSpec::affine(1.0, 1.0))
                .with_q(FunctionSpec::constant(0.5)),
        ),
        preset(
            "constant-rates",
            "r=1, q=0.5, g(x)=x/2, sigma2(x)=x^2/4, uniform kernel: Many-to-One holds with equality",
            1.0,
            ModelSpec::default()
                .with_g(FunctionSpec::linear(0.5))
                .with_sigma2(FunctionSpec::quadratic_affine(0.25, 0.0))
                .with_r(FunctionSpec::constant(1.0))
                .with_q(FunctionSpec::constant(0.5))
                .with_kappa(KernelSpec::Uniform),
        ),
        preset(
            "pgcd",
            "running example with alpha_q=0: g(x)/x - q(x) = 0.5",
            1.0,
            running(1.0, 0.5, 0.0, 1.0, 1.0, 0.0, 0.5),
        ),
        preset(
            "lgbe",
            "running example with beta_sigma=0, gamma=0.8: gamma r - q = 0.3, alpha_gamma = 1 - log2(1.8)",
            1.0,
            running(0.5, 1.0, 0.0, 1.0, 1.0, 0.8, 0.5),
        ),
        preset(
            "halving-balance",
            "g(x)=2x, r=1, halving: G_2 vanishes identically",
            1.0,
            ModelSpec::default().with_g(FunctionSpec::linear(2.0)).with_r(FunctionSpec::constant(1.0)),
        ),
        preset(
            "diffusive-generic",
            "g(x)=x, sigma2(x)=x^2/4+x/2, r(x)=x/2+1, uniform kernel",
            1.0,
            ModelSpec::default()
                .with_g(FunctionSpec::linear(1.0))
                .with_sigma2(FunctionSpec::quadratic_affine(0.25, 0.5))
                .with_r(FunctionSpec::affine(0.5, 1.0))
                .with_kappa(KernelSpec::Uniform),
        ),
        preset(
            "feller",
            "running example with sigma2(x)=4x, alpha_q=0: loads reach 0 in finite time",
            1.0,
            running(0.5, 0.0, 4.0, 1.0, 1.0, 0.0, 0.5),
        ),
    ];
    for p in non_redundancy_presets() {
        out.push(preset(p.name, &format!("non-redundancy example, expected: {}", p.expected.label()), 1.0, p.params.to_spec()));
    }
    out
}

pub fn find_preset(name: &str) -> Result<Preset> {
    presets().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<String> = presets().into_iter().map(|p| p.name).collect();
        Error::config("preset", format!("unknown preset `{name}`; known: {}", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model_config;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for p in presets() {
            p.spec.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(parse_model_config(&p.config_text()).unwrap(), p.spec, "{}", p.name);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<String> = presets().into_iter().map(|p| p.name).collect();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
        assert!(find_preset("nope").is_err());
    }
}

//! TOML model configs.
//!
//! ```toml
//! [g]
//! form = "affine"            # a·x + b
//! params = [2.0, 0.0]
//! [sigma2]
//! form = "quadratic-affine"  # a·x² + b·x
//! params = [1.0, 0.0]
//! [r]
//! form = "expression"
//! params = "x + 1"
//! [pi]
//! form = "power-law"         # [α_π, β_π, z_lo, z_hi]; z_hi may be omitted for +∞
//! params = [1.0, 1.5, 0.0]
//! [stable]                   # empty table: stable jumps disabled
//! [kappa]
//! form = "dirac-half"
//! ```
//!
//! Function sections missing from the document default to zero, `[pi]` to no
//! jumps and `[stable]` to disabled. `[kappa]` is required.

use serde::Deserialize;
use toml::{Spanned, Value};

use super::{FunctionSpec, JumpMeasureSpec, KernelSpec, ModelSpec, StableJumpSpec};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    g: Option<Spanned<RawSection>>,
    sigma2: Option<Spanned<RawSection>>,
    p: Option<Spanned<RawSection>>,
    r: Option<Spanned<RawSection>>,
    q: Option<Spanned<RawSection>>,
    pi: Option<Spanned<RawSection>>,
    stable: Option<Spanned<RawSection>>,
    kappa: Option<Spanned<RawSection>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    form: Option<Spanned<String>>,
    params: Option<Spanned<Value>>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line_of(&self, offset: usize) -> usize {
        1 + self.text[..offset.min(self.text.len())].bytes().filter(|&b| b == b'\n').count()
    }

    fn err(&self, offset: usize, field: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: Some(self.line_of(offset)),
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    fn numbers(&self, sec: &Spanned<RawSection>, field: &str, min: usize, max: usize) -> Result<Vec<f64>> {
        let params = sec
            .get_ref()
            .params
            .as_ref()
            .ok_or_else(|| self.err(sec.span().start, field, "missing `params`"))?;
        let at = params.span().start;
        let arr = params
            .get_ref()
            .as_array()
            .ok_or_else(|| self.err(at, field, "`params` must be an array of numbers"))?;
        if arr.len() < min || arr.len() > max {
            let want = if min == max { format!("{min}") } else { format!("{min} to {max}") };
            return Err(self.err(at, field, format!("expected {want} params, got {}", arr.len())));
        }
        arr.iter().map(|v| number(v).ok_or_else(|| self.err(at, field, format!("not a number: {v}")))).collect()
    }

    fn pairs(&self, sec: &Spanned<RawSection>, field: &str) -> Result<Vec<(f64, f64)>> {
        let params = sec
            .get_ref()
            .params
            .as_ref()
            .ok_or_else(|| self.err(sec.span().start, field, "missing `params`"))?;
        let at = params.span().start;
        let bad = || self.err(at, field, "`params` must be an array of [location, weight] pairs");
        let arr = params.get_ref().as_array().ok_or_else(bad)?;
        arr.iter()
            .map(|p| match p.as_array().map(|v| v.as_slice()) {
                Some([a, b]) => Ok((number(a).ok_or_else(bad)?, number(b).ok_or_else(bad)?)),
                _ => Err(bad()),
            })
            .collect()
    }

    fn form<'s>(&self, sec: &'s Spanned<RawSection>, field: &str) -> Result<&'s Spanned<String>> {
        sec.get_ref()
            .form
            .as_ref()
            .ok_or_else(|| self.err(sec.span().start, field, "missing `form`"))
    }

    fn no_params(&self, sec: &Spanned<RawSection>, field: &str) -> Result<()> {
        match &sec.get_ref().params {
            Some(p) => Err(self.err(p.span().start, field, "this form takes no `params`")),
            None => Ok(()),
        }
    }

    fn function(&self, sec: &Option<Spanned<RawSection>>, field: &str) -> Result<FunctionSpec> {
        let Some(sec) = sec else { return Ok(FunctionSpec::zero()) };
        let form = self.form(sec, field)?;
        Ok(match form.get_ref().as_str() {
            "affine" => {
                let v = self.numbers(sec, field, 2, 2)?;
                FunctionSpec::affine(v[0], v[1])
            }
            "power" => {
                let v = self.numbers(sec, field, 2, 2)?;
                FunctionSpec::power(v[0], v[1])
            }
            "quadratic-affine" => {
                let v = self.numbers(sec, field, 2, 2)?;
                FunctionSpec::quadratic_affine(v[0], v[1])
            }
            "expression" => {
                let params = sec
                    .get_ref()
                    .params
                    .as_ref()
                    .ok_or_else(|| self.err(sec.span().start, field, "missing `params`"))?;
                let text = params
                    .get_ref()
                    .as_str()
                    .ok_or_else(|| self.err(params.span().start, field, "expression `params` must be a string"))?;
                FunctionSpec::expression(text)
                    .map_err(|e| self.err(params.span().start, field, e.to_string()))?
            }
            other => {
                return Err(self.err(
                    form.span().start,
                    field,
                    format!("unknown form `{other}` (expected affine, power, quadratic-affine or expression)"),
                ))
            }
        })
    }

    fn jumps(&self, sec: &Option<Spanned<RawSection>>) -> Result<JumpMeasureSpec> {
        let Some(sec) = sec else { return Ok(JumpMeasureSpec::None) };
        let field = "pi";
        let form = self.form(sec, field)?;
        let at = form.span().start;
        let inv = |e: Error| self.err(at, field, e.to_string());
        match form.get_ref().as_str() {
            "none" => {
                self.no_params(sec, field)?;
                Ok(JumpMeasureSpec::None)
            }
            "power-law" => {
                let v = self.numbers(sec, field, 2, 4)?;
                let lo = v.get(2).copied().unwrap_or(0.0);
                let hi = v.get(3).copied().unwrap_or(f64::INFINITY);
                JumpMeasureSpec::power_law(v[0], v[1], lo, hi).map_err(inv)
            }
            "atoms" => JumpMeasureSpec::atoms(self.pairs(sec, field)?).map_err(inv),
            "exponential" => {
                let v = self.numbers(sec, field, 2, 2)?;
                JumpMeasureSpec::exponential(v[0], v[1]).map_err(inv)
            }
            other => Err(self.err(
                at,
                field,
                format!("unknown form `{other}` (expected none, power-law, atoms or exponential)"),
            )),
        }
    }

    fn stable(&self, sec: &Option<Spanned<RawSection>>) -> Result<StableJumpSpec> {
        let Some(sec) = sec else { return Ok(StableJumpSpec::disabled()) };
        let field = "stable";
        let Some(form) = sec.get_ref().form.as_ref() else {
            self.no_params(sec, field)?;
            return Ok(StableJumpSpec::disabled());
        };
        let at = form.span().start;
        let inv = |e: Error| self.err(at, field, e.to_string());
        match form.get_ref().as_str() {
            "none" => {
                self.no_params(sec, field)?;
                Ok(StableJumpSpec::disabled())
            }
            // Nonnegative prefactor of z^(−2−𝔟).
            "scale" => {
                let v = self.numbers(sec, field, 2, 2)?;
                StableJumpSpec::new(v[0], v[1]).map_err(inv)
            }
            "signed-constant" => {
                let v = self.numbers(sec, field, 2, 2)?;
                StableJumpSpec::from_signed_constant(v[0], v[1]).map_err(inv)
            }
            other => Err(self.err(
                at,
                field,
                format!("unknown form `{other}` (expected none, scale or signed-constant)"),
            )),
        }
    }

    fn kernel(&self, sec: &Option<Spanned<RawSection>>) -> Result<KernelSpec> {
        let field = "kappa";
        let Some(sec) = sec else {
            return Err(Error::Config { line: None, field: Some(field.into()), message: "missing [kappa] section".into() });
        };
        let form = self.form(sec, field)?;
        let at = form.span().start;
        let inv = |e: Error| self.err(at, field, e.to_string());
        match form.get_ref().as_str() {
            "dirac-half" => {
                self.no_params(sec, field)?;
                Ok(KernelSpec::DiracHalf)
            }
            "uniform" => {
                self.no_params(sec, field)?;
                Ok(KernelSpec::Uniform)
            }
            "symmetric-beta" => {
                let v = self.numbers(sec, field, 1, 1)?;
                KernelSpec::symmetric_beta(v[0]).map_err(inv)
            }
            "atoms" => KernelSpec::atoms(self.pairs(sec, field)?).map_err(inv),
            other => Err(self.err(
                at,
                field,
                format!("unknown form `{other}` (expected dirac-half, uniform, symmetric-beta or atoms)"),
            )),
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        _ => None,
    }
}

/// Parses and validates a model config.
pub fn parse_model_config(text: &str) -> Result<ModelSpec> {
    let ctx = Ctx { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| ctx.line_of(s.start));
        Error::Config { line, field: None, message: e.message().trim().to_string() }
    })?;
    let spec = ModelSpec {
        g: ctx.function(&raw.g, "g")?,
        sigma2: ctx.function(&raw.sigma2, "sigma2")?,
        p: ctx.function(&raw.p, "p")?,
        r: ctx.function(&raw.r, "r")?,
        q: ctx.function(&raw.q, "q")?,
        pi: ctx.jumps(&raw.pi)?,
        stable: ctx.stable(&raw.stable)?,
        kappa: ctx.kernel(&raw.kappa)?,
    };
    spec.validate()?;
    Ok(spec)
}

fn fnum(x: f64) -> String {
    if x.is_infinite() {
        "\"inf\"".into()
    } else {
        format!("{x:?}")
    }
}

fn function_toml(name: &str, f: &FunctionSpec) -> String {
    let body = match f {
        FunctionSpec::Affine { a, b } => format!("form = \"affine\"\nparams = [{}, {}]", fnum(*a), fnum(*b)),
        FunctionSpec::Power { a, b } => format!("form = \"power\"\nparams = [{}, {}]", fnum(*a), fnum(*b)),
        FunctionSpec::QuadraticAffine { a, b } => {
            format!("form = \"quadratic-affine\"\nparams = [{}, {}]", fnum(*a), fnum(*b))
        }
        FunctionSpec::Expression(e) => format!("form = \"expression\"\nparams = {}", Value::String(e.to_string())),
    };
    format!("[{name}]\n{body}\n")
}

fn pairs_toml(p: &[(f64, f64)]) -> String {
    let items: Vec<String> = p.iter().map(|&(a, b)| format!("[{}, {}]", fnum(a), fnum(b))).collect();
    format!("[{}]", items.join(", "))
}

/// Renders a spec in the config format; `parse_model_config` reads it back unchanged.
pub fn to_toml(spec: &ModelSpec) -> String {
    let mut out = String::new();
    for (name, f) in [("g", &spec.g), ("sigma2", &spec.sigma2), ("p", &spec.p), ("r", &spec.r), ("q", &spec.q)] {
        out += &function_toml(name, f);
    }
    out += "[pi]\n";
    out += &match &spec.pi {
        JumpMeasureSpec::None => "form = \"none\"\n".to_string(),
        JumpMeasureSpec::PowerLaw { alpha, beta, z_lo, z_hi } => format!(
            "form = \"power-law\"\nparams = [{}, {}, {}, {}]\n",
            fnum(*alpha),
            fnum(*beta),
            fnum(*z_lo),
            fnum(*z_hi)
        ),
        JumpMeasureSpec::Atoms(a) => format!("form = \"atoms\"\nparams = {}\n", pairs_toml(a)),
        JumpMeasureSpec::Exponential { mass, rate } => {
            format!("form = \"exponential\"\nparams = [{}, {}]\n", fnum(*mass), fnum(*rate))
        }
    };
    out += "[stable]\n";
    if spec.stable.is_enabled() {
        out += &format!("form = \"scale\"\nparams = [{}, {}]\n", fnum(spec.stable.scale), fnum(spec.stable.b));
    }
    out += "[kappa]\n";
    out += &match &spec.kappa {
        KernelSpec::DiracHalf => "form = \"dirac-half\"\n".to_string(),
        KernelSpec::Uniform => "form = \"uniform\"\n".to_string(),
        KernelSpec::SymmetricBeta(l) => format!("form = \"symmetric-beta\"\nparams = [{}]\n", fnum(*l)),
        KernelSpec::Atoms(a) => format!("form = \"atoms\"\nparams = {}\n", pairs_toml(a)),
    };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RunningExample;

    const RUNNING: &str = r#"
[g]
form = "affine"
params = [2, 0]
[sigma2]
form = "quadratic-affine"
params = [1, 0]
[p]
form = "power"
params = [0, 1]
[r]
form = "affine"
params = [1, 1]
[q]
form = "affine"
params = [0, 0.5]
[kappa]
form = "dirac-half"
[stable]
"#;

    #[test]
    fn running_example_parses() {
        let spec = parse_model_config(RUNNING).unwrap();
        let re = RunningExample::from_spec(&spec).unwrap();
        assert_eq!(re, RunningExample::standard());
        assert!(!spec.stable.is_enabled());
        assert_eq!(spec.stable.scale, 0.0);
    }

    #[test]
    fn bad_pi_exponent_is_named() {
        let text = format!("{RUNNING}[pi]\nform = \"power-law\"\nparams = [1, 0.5]\n");
        let e = parse_model_config(&text).unwrap_err().to_string();
        assert!(e.contains("β_π outside (1,2)"), "{e}");
        assert!(e.contains("line 21"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = "[kappa]\nform = \"uniform\"\nwidth = 3\n";
        match parse_model_config(text).unwrap_err() {
            Error::Config { line, message, .. } => {
                assert_eq!(line, Some(3));
                assert!(message.contains("width"), "{message}");
            }
            other => panic!("{other}"),
        }
        assert!(parse_model_config("[kappa]\nform = \"uniform\"\n[h]\n").is_err());
    }

    #[test]
    fn round_trip_through_toml() {
        let spec = parse_model_config(RUNNING)
            .unwrap()
            .with_r(FunctionSpec::expression("0.5*x + max(x, 1)").unwrap())
            .with_pi(JumpMeasureSpec::power_law(0.3, 1.5, 0.0, f64::INFINITY).unwrap())
            .with_stable(StableJumpSpec::new(0.2, -0.4).unwrap())
            .with_kappa(KernelSpec::symmetric_beta(2.0).unwrap());
        let back = parse_model_config(&to_toml(&spec)).unwrap();
        assert_eq!(back, spec);
    }
}

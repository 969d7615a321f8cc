//! Load a model from TOML, validate it and write it back out.

use parasite_branching::model::{parse_model_config, to_toml};

const MODEL: &str = r#"
[g]
form = "affine"
params = [1.0, 0.0]
[sigma2]
form = "affine"
params = [0.5, 0.0]
[r]
form = "affine"
params = [0.5, 1.0]
[q]
form = "affine"
params = [0.0, 0.3]
[pi]
form = "exponential"
params = [1.0, 2.0]
[kappa]
form = "uniform"
"#;

fn main() -> anyhow::Result<()> {
    let spec = parse_model_config(MODEL)?;
    spec.validate()?;
    println!("g(2) = {}, r(2) = {}, q(2) = {}", spec.g.eval(2.0), spec.r.eval(2.0), spec.q.eval(2.0));
    print!("{}", to_toml(&spec));
    Ok(())
}

//! The jump integrals C_a and I_a computed by two routes each, next to closed forms.

use parasite_branching::analysis::{compute_ca, compute_ca_alt, compute_ia, compute_ia_separated, solve_alpha_gamma};
use parasite_branching::model::{JumpMeasureSpec, KernelSpec, StableJumpSpec};

fn main() -> anyhow::Result<()> {
    let stable = StableJumpSpec::new(1.0, -0.5)?;
    for a in [0.8, 1.0, 2.0] {
        println!("C_{a}: {:.10} / {:.10}", compute_ca(a, &stable)?, compute_ca_alt(a, &stable)?);
    }
    let pi = JumpMeasureSpec::power_law(1.0, 1.5, 0.0, f64::INFINITY)?;
    for x in [0.1, 1.0, 10.0] {
        let separated = compute_ia_separated(1.0, x, &pi)?.expect("power law separates");
        println!("I_1({x}): nested {:.10}, separated {separated:.10}", compute_ia(1.0, x, &pi)?);
    }
    for gamma in [0.0, 0.8, 3.0] {
        let a = solve_alpha_gamma(&KernelSpec::DiracHalf, gamma)?;
        println!("alpha_gamma({gamma}) = {a:.12} (halving kernel: {:.12})", 1.0 - (1.0 + gamma).log2());
    }
    Ok(())
}

//! α_γ: the root of ψ(α) = 2E[Θ^α] − 1 = γ on (α₀, 1].

use crate::model::KernelSpec;
use crate::{Error, Result};

/// Solves 2E[Θ^α] − 1 = γ by bisection down to adjacent floats, so the residual stays small
/// even where ψ is steep near α₀. ψ is strictly decreasing with ψ(1) = 0, so the root
/// lies in (α₀, 1] for every γ ≥ 0.
pub fn solve_alpha_gamma(kappa: &KernelSpec, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("γ must be a finite nonnegative number, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let a0 = kappa.alpha0();
    let mut hi = 1.0;
    let mut lo = 0.0;
    // Walk down until ψ(lo) > γ: halve the distance to α₀, or double the step when α₀ = −∞.
    let mut step = 1.0;
    for _ in 0..2000 {
        lo = if a0.is_finite() { a0 + (hi - a0) * 0.5 } else { hi - step };
        if kappa.psi(lo)? > gamma {
            break;
        }
        hi = lo;
        step *= 2.0;
        if a0.is_finite() && hi - a0 < 1e-300 {
            return Err(Error::Domain(format!("γ = {gamma} lies outside the range of ψ for {kappa}")));
        }
    }
    if !(kappa.psi(lo)? > gamma) {
        return Err(Error::Domain(format!("γ = {gamma} lies outside the range of ψ for {kappa}")));
    }
    // Invariant: ψ(lo) > γ ≥ ψ(hi).
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kappa.psi(mid)? > gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (kappa.psi(lo)? - gamma, kappa.psi(hi)? - gamma);
    Ok(if rl.abs() < rh.abs() { lo } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_kernel_matches_log2_form() {
        for g in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let a = solve_alpha_gamma(&KernelSpec::DiracHalf, g).unwrap();
            assert!((a - (1.0 - (1.0 + g).log2())).abs() < 1e-10, "γ = {g}");
        }
    }

    #[test]
    fn uniform_root_inverts_psi() {
        // ψ(α) = 2/(α+1) − 1 for the uniform kernel.
        let a = solve_alpha_gamma(&KernelSpec::Uniform, 2.0).unwrap();
        assert!((a - (-1.0 / 3.0)).abs() < 1e-10);
        assert!(solve_alpha_gamma(&KernelSpec::Uniform, -0.1).is_err());
    }
}

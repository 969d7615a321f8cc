//! Acceptance runner: one line per criterion, nonzero exit if any criterion fails.
//!
//! Monte Carlo criteria run the registered experiments at their registered sizes; the
//! closed-form criteria carry their own oracles below.

mod support;

use std::process::ExitCode;
use std::time::Instant;

use parasite_branching::analysis::{compute_ca, compute_ca_alt, compute_ia, compute_ia_separated, solve_alpha_gamma};
use parasite_branching::harness::{find_experiment, run_experiment, ExperimentResult};
use parasite_branching::model::{JumpMeasureSpec, KernelSpec, StableJumpSpec};
use statrs::function::beta::ln_beta;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn summarize(r: &ExperimentResult) -> String {
    let failed: Vec<String> = r
        .failed_cells()
        .map(|c| {
            let at = match (c.t, c.k) {
                (Some(t), Some(k)) => format!(" t={t} K={k}"),
                (Some(t), None) => format!(" t={t}"),
                _ => String::new(),
            };
            format!("{}{at}: {:.6} vs {:.6} (tol {:.3e})", c.label, c.estimate.mean, c.reference, c.tolerance)
        })
        .collect();
    let mut s = format!("{} {}/{} cells", r.id, r.cells.len() - failed.len(), r.cells.len());
    if !failed.is_empty() {
        s += &format!(" [failed: {}]", failed.join("; "));
    }
    for n in &r.notes {
        s += &format!(" [{n}]");
    }
    s
}

fn experiments(ids: &[&str]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ids {
        match find_experiment(id).and_then(|spec| run_experiment(&spec)) {
            Ok(r) => {
                pass &= r.pass;
                parts.push(summarize(&r));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{id}: error: {e}"));
            }
        }
    }
    verdict(pass, parts.join(" | "))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// α_γ on the halving kernel against 1 − log₂(1+γ).
fn alpha_gamma_solver() -> Verdict {
    let mut worst = 0.0f64;
    for gamma in [0.0, 0.5, 1.0, 3.0] {
        match solve_alpha_gamma(&KernelSpec::DiracHalf, gamma) {
            Ok(a) => worst = worst.max((a - (1.0 - (1.0 + gamma).log2())).abs()),
            Err(e) => return verdict(false, format!("γ={gamma}: {e}")),
        }
    }
    verdict(worst <= 1e-10, format!("max |error| = {worst:.2e}"))
}

/// Closed form for the stable measure scale·z^(−2−𝔟):
/// (1+𝔟)⁻¹∫ z(1+z)^(−a) ρ(dz) = scale·B(−𝔟, a+𝔟)/(1+𝔟).
fn ca_closed(scale: f64, b: f64, a: f64) -> f64 {
    scale * ln_beta(-b, a + b).exp() / (1.0 + b)
}

/// 𝔍_a for π = α_π z^(−1−β_π) on (0,∞), integrating in y first:
/// (a + 1_{a=0})·α_π·B(2−β_π, a+β_π−1)/(β_π(β_π−1)).
fn j_closed(alpha: f64, beta: f64, a: f64) -> f64 {
    let pref = if a == 0.0 { 1.0 } else { a };
    pref * alpha * ln_beta(2.0 - beta, a + beta - 1.0).exp() / (beta * (beta - 1.0))
}

fn analysis_duals() -> Verdict {
    // (label, values that must agree) or the error that prevented computing them.
    let mut rows: Vec<(String, Result<Vec<f64>, String>)> = Vec::new();
    for &(scale, b, a) in &[(1.0, -0.5, 0.8), (1.0, -0.5, 1.0), (2.0, -0.3, 2.0), (0.5, -0.8, 1.5), (1.0, -0.2, 0.3), (3.0, -0.6, 4.0)] {
        let s = StableJumpSpec::new(scale, b).expect("valid stable spec");
        let v = match (compute_ca(a, &s), compute_ca_alt(a, &s)) {
            (Ok(x), Ok(y)) => Ok(vec![x, y, ca_closed(scale, b, a)]),
            (x, y) => Err(format!("{x:?} / {y:?}")),
        };
        rows.push((format!("C_a(scale={scale}, b={b}, a={a})"), v));
    }
    for &(alpha, beta, a) in &[(1.0, 1.5, 0.5), (0.7, 1.2, 2.0), (2.0, 1.8, 0.0)] {
        let pi = JumpMeasureSpec::power_law(alpha, beta, 0.0, f64::INFINITY).expect("valid power law");
        for x in [0.1, 1.0, 10.0] {
            let v = match (compute_ia(a, x, &pi), compute_ia_separated(a, x, &pi)) {
                (Ok(direct), Ok(Some(sep))) => Ok(vec![direct * x.powf(beta), sep * x.powf(beta), j_closed(alpha, beta, a)]),
                (d, s) => Err(format!("{d:?} / {s:?}")),
            };
            rows.push((format!("I_a(α_π={alpha}, β_π={beta}, a={a}, x={x})·x^β_π"), v));
        }
    }
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for (label, v) in &rows {
        match v {
            Ok(values) => {
                let e = values.windows(2).map(|w| rel(w[0], w[1])).fold(0.0, f64::max);
                worst = worst.max(e);
                if !(e <= 1e-6) {
                    fails.push(format!("{label}: {values:?}"));
                }
            }
            Err(e) => fails.push(format!("{label}: {e}")),
        }
    }
    let pass = fails.is_empty() && rows.len() >= 9;
    let mut detail = format!("{} points, worst relative gap {worst:.2e}", rows.len());
    if !fails.is_empty() {
        detail += &format!(" [failed: {}]", fails.join("; "));
    }
    verdict(pass, detail)
}

fn property_suites() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, suite) in support::criterion_suites() {
        match suite() {
            Ok(()) => parts.push(format!("{name}: ok")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("mean population size", Box::new(|| experiments(&["mean-ldcg"]))),
        ("second moment", Box::new(|| experiments(&["second-moment-ldcg", "second-moment-ratio"]))),
        ("many-to-one, constant rates", Box::new(|| experiments(&["mto-constant-rates"]))),
        ("weighted many-to-one", Box::new(|| experiments(&["weighted-mto-pgcd", "weighted-mto-lgbe"]))),
        ("martingale diagnostic", Box::new(|| experiments(&["martingale-halving", "martingale-generic"]))),
        ("geometric decay bound", Box::new(|| experiments(&["decay-bound-lgbe"]))),
        ("alpha_gamma solver", Box::new(alpha_gamma_solver)),
        ("analysis duals", Box::new(analysis_duals)),
        ("sandwich ordering", Box::new(|| experiments(&["sandwich-ldcg-plus-plus"]))),
        ("extinction trend", Box::new(|| experiments(&["extinction-feller"]))),
        (
            "condition audit",
            Box::new(|| experiments(&["audit-ex-EXT", "audit-ex-LGBE", "audit-ex-PGCD"])),
        ),
        ("property suites", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {} ({:.1}s) {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

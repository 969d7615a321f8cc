//! Monte Carlo checks against closed forms, each at a fixed seed and a 3·SE tolerance
//! unless stated otherwise.

use parasite_branching::analysis::{check_condition, Assumption, ConditionQuery, MomentFormulas};
use parasite_branching::auxiliary::{simulate_spine, SpineVariant};
use parasite_branching::dynamics::{sample_stable_jump, simulate_flow, IntegratorConfig};
use parasite_branching::harness::find_preset;
use parasite_branching::model::{FunctionSpec, KernelSpec, ModelSpec, RunningExample, StableJumpSpec};
use parasite_branching::population::{sample_functionals_mc, simulate_population, Functional, PopulationCaps};
use parasite_branching::rng::{seeded, StreamSource};
use parasite_branching::stats::Estimate;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn assert_within(label: &str, e: &Estimate, reference: f64) {
    assert!(e.within(reference, 3.0), "{label}: {} ± {} vs {reference}", e.mean, e.se);
}

#[test]
fn uniform_kernel_mean_is_one_half() {
    let mut rng = seeded(11);
    let xs: Vec<f64> = (0..100_000).map(|_| KernelSpec::Uniform.sample(&mut rng)).collect();
    assert_within("E[Θ]", &Estimate::from_samples(&xs), 0.5);
}

#[test]
fn stable_tail_sampler_matches_its_cdf_and_is_heavy() {
    let st = StableJumpSpec::new(1.0, -0.5).unwrap();
    let mut rng = seeded(12);
    let draws: Vec<f64> = (0..1_000_000).map(|_| sample_stable_jump(&st, 1.0, &mut rng)).collect();
    assert!(draws.iter().all(|&z| z >= 1.0));
    let above: Vec<f64> = draws[..100_000].iter().map(|&z| if z > 4.0 { 1.0 } else { 0.0 }).collect();
    assert_within("P(z > 4)", &Estimate::from_samples(&above), 0.5);
    // Tail index 1/2: the running mean keeps growing with the sample size.
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (small, large) = (mean(&draws[..1_000]), mean(&draws));
    assert!(large > 10.0 * small, "mean of 10⁶ draws {large} vs 10³ draws {small}");
}

fn flow_endpoints(spec: &ModelSpec, x0: f64, reps: u64, dt: f64, seed: u64) -> Estimate {
    let cfg = IntegratorConfig::default().with_dt(dt);
    let source = StreamSource::new(seed, "flow-endpoints");
    let xs: Vec<f64> = (0..reps).into_par_iter().map(|i| simulate_flow(x0, 0.0, 1.0, spec, &cfg, &mut source.stream(i)).endpoint()).collect();
    Estimate::from_samples(&xs)
}

#[test]
fn driftless_feller_diffusion_keeps_its_mean() {
    let spec = ModelSpec::default().with_sigma2(FunctionSpec::linear(1.0));
    assert_within("E[X_1]", &flow_endpoints(&spec, 1.0, 100_000, 1e-2, 13), 1.0);
}

#[test]
fn geometric_brownian_motion_mean() {
    let spec = ModelSpec::default().with_g(FunctionSpec::linear(0.5)).with_sigma2(FunctionSpec::quadratic_affine(0.125, 0.0));
    assert_within("E[X_1]", &flow_endpoints(&spec, 1.0, 100_000, 1e-3, 14), 0.5f64.exp());
}

/// Euler on x' = 2x is first order: halving dt halves the endpoint error.
#[test]
fn pure_drift_error_halves_with_dt() {
    let spec = ModelSpec::default().with_g(FunctionSpec::linear(2.0));
    let err = |dt: f64| {
        let cfg = IntegratorConfig::default().with_dt(dt);
        (simulate_flow(1.0, 0.0, 1.0, &spec, &cfg, &mut seeded(0)).endpoint() - 2f64.exp()).abs()
    };
    for dt in [1e-2, 5e-3, 1e-3] {
        let ratio = err(dt) / err(dt / 2.0);
        assert!((ratio - 2.0).abs() < 0.1, "dt = {dt}: error ratio {ratio}");
    }
}

/// Pure birth at rate 1 with no trait dependence: N_1 ~ Geometric(e^{−1}) on {1, 2, ...}.
#[test]
fn yule_population_is_geometric() {
    const REPS: u64 = 10_000;
    let spec = ModelSpec::default().with_r(FunctionSpec::constant(1.0));
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let source = StreamSource::new(15, "yule");
    let counts: Vec<usize> = (0..REPS)
        .into_par_iter()
        .map(|i| {
            let run = simulate_population(1.0, 1.0, &spec, &cfg, &PopulationCaps::default(), &[1.0], &[], &mut source.stream(i))
                .expect("population run");
            run.samples[0].n
        })
        .collect();
    let as_f64: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    assert_within("E[N_1]", &Estimate::from_samples(&as_f64), std::f64::consts::E);

    let p = (-1.0f64).exp();
    let pmf = |k: usize| p * (1.0 - p).powi(k as i32 - 1);
    // Bins {1}, {2}, ..., {last−1} and a tail bin, each with expected count ≥ 5.
    let mut last = 1;
    while REPS as f64 * (1.0 - p).powi(last as i32) >= 5.0 {
        last += 1;
    }
    let mut chi2 = 0.0;
    for k in 1..last {
        let observed = counts.iter().filter(|&&n| n == k).count() as f64;
        let expected = REPS as f64 * pmf(k);
        chi2 += (observed - expected).powi(2) / expected;
    }
    let observed = counts.iter().filter(|&&n| n >= last).count() as f64;
    let expected = REPS as f64 * (1.0 - p).powi(last as i32 - 1);
    chi2 += (observed - expected).powi(2) / expected;
    let dof = (last - 1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
    assert!(chi2 <= critical, "χ² = {chi2} with {dof} dof, critical {critical}");
}

fn lgbe_model() -> (ModelSpec, f64, f64, f64) {
    let preset = find_preset("lgbe").unwrap();
    let report = check_condition(&ConditionQuery::new(Assumption::Lgbe), &preset.spec);
    assert!(report.is_holding(), "{report:?}");
    let w = &report.witnesses;
    let a = w["alpha_gamma"];
    let lambda = a * w["g"] + a * (a - 1.0) * w["sigma2"] + w["c_frak"];
    (preset.spec, preset.x0, a, lambda)
}

/// E[Σ_u f(X_t^u)] = x^α e^{λt} E[f(𝒴_t) 𝒴_t^{−α}] for the spine weighted by x^{α_γ}.
#[test]
fn weighted_spine_reproduces_population_sums() {
    const REPS: usize = 10_000;
    const K: f64 = 1.0;
    let (spec, x0, a, lambda) = lgbe_model();
    let times = [0.25, 0.5, 1.0];
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let functionals = [Functional::Count, Functional::Sum(FunctionSpec::linear(1.0)), Functional::CountAbove(K)];
    let pop = sample_functionals_mc(&spec, x0, &times, &functionals, REPS, &cfg, &PopulationCaps::default(), &StreamSource::new(16, "population"))
        .unwrap();
    assert_eq!(pop.capped_replicates, 0);

    let source = StreamSource::new(16, "weighted-spine");
    let paths: Vec<Vec<f64>> = (0..REPS as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_spine(SpineVariant::Weighted { alpha: a }, x0, 1.0, &spec, &cfg, &mut source.stream(i)).unwrap();
            times.iter().map(|&t| path.value_at(t)).collect()
        })
        .collect();
    let fs: [&dyn Fn(f64) -> f64; 3] = [&|_| 1.0, &|y| y, &|y| if y > K { 1.0 } else { 0.0 }];
    for (ti, &t) in times.iter().enumerate() {
        for (fi, f) in fs.iter().enumerate() {
            let weight = x0.powf(a) * (lambda * t).exp();
            let spine: Vec<f64> = paths.iter().map(|p| weight * f(p[ti]) * p[ti].powf(-a)).collect();
            let (lhs, rhs) = (pop.estimate(ti, fi), Estimate::from_samples(&spine));
            assert!(lhs.agrees_with(&rhs, 3.0), "{} at t = {t}: population {lhs:?} vs spine {rhs:?}", functionals[fi].name());
        }
    }
}

/// Under PGCD with SN0 the spine weighted by x never reaches 0.
#[test]
fn load_weighted_spine_avoids_zero_under_pgcd() {
    let preset = find_preset("pgcd").unwrap();
    for a in [Assumption::Pgcd, Assumption::Sn0] {
        let r = check_condition(&ConditionQuery::new(a), &preset.spec);
        assert!(r.is_holding(), "{r:?}");
    }
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let source = StreamSource::new(17, "weighted-one");
    let hits = (0..10_000u64)
        .into_par_iter()
        .filter(|&i| {
            let p = simulate_spine(SpineVariant::Weighted { alpha: 1.0 }, preset.x0, 1.0, &preset.spec, &cfg, &mut source.stream(i)).unwrap();
            p.values.iter().any(|&v| v == 0.0)
        })
        .count();
    assert_eq!(hits, 0);
}

/// Pure birth with trivial loads: E[N_1] = e.
#[test]
fn pure_birth_mean_is_e() {
    let spec = ModelSpec::default().with_r(FunctionSpec::constant(1.0));
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let mc = sample_functionals_mc(&spec, 1.0, &[1.0], &[Functional::Count], 10_000, &cfg, &PopulationCaps::default(), &StreamSource::new(18, "birth"))
        .unwrap();
    assert_within("E[N_1]", &mc.estimate(0, 0), std::f64::consts::E);
}

/// The transient second-moment formula closes E[N_t·ΣX_t] as E[N_t]·E[ΣX_t], which is exact
/// only without load-dependent division. With α = 1 the simulated value sits above it, so
/// this check fails; it stays as a record of the gap.
#[test]
fn second_moment_at_t2_matches_transient_formula() {
    let preset = find_preset("ldcg").unwrap();
    let mf = MomentFormulas::from_spec(&preset.spec).unwrap();
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let mc = sample_functionals_mc(&preset.spec, 1.0, &[2.0], &[Functional::CountSquared], 4_000, &cfg, &PopulationCaps::default(), &StreamSource::new(19, "second-moment"))
        .unwrap();
    assert_eq!(mc.capped_replicates, 0);
    assert_within("E[N_2²]", &mc.estimate(0, 0), mf.second_moment(1.0, 2.0));
}

fn scan(spec: &ModelSpec, times: &[f64], functional: Functional, seed: u64) -> Vec<Estimate> {
    let cfg = IntegratorConfig::default().with_dt(1e-3);
    let mc = sample_functionals_mc(spec, 1.0, times, &[functional], 4_000, &cfg, &PopulationCaps::default(), &StreamSource::new(seed, "scan"))
        .unwrap();
    assert_eq!(mc.capped_replicates, 0);
    (0..times.len()).map(|i| mc.estimate(i, 0)).collect()
}

fn assert_decreasing(label: &str, es: &[Estimate]) {
    for w in es.windows(2) {
        assert!(w[1].mean < w[0].mean, "{label}: {es:?}");
    }
    let (first, last) = (&es[0], &es[es.len() - 1]);
    assert!(first.mean - last.mean > 3.0 * first.se.hypot(last.se), "{label}: first and last bands overlap: {es:?}");
}

/// No linear division, strong growth: EXPL holds and the share of lightly infected cells falls.
#[test]
fn explosion_certified_model_loses_light_cells() {
    let spec = RunningExample { alpha_g: 4.0, alpha_sigma: 0.5, beta_sigma: 0.0, alpha: 0.0, beta: 1.0, alpha_q: 0.0, beta_q: 0.5 }.to_spec();
    assert!(check_condition(&ConditionQuery::new(Assumption::Expl), &spec).is_holding());
    let es = scan(&spec, &[0.25, 0.5, 1.0], Functional::PropLeq(1.0), 20);
    assert_decreasing("E[1{N≥1} prop(X ≤ 1)]", &es);
}

/// Strong noise, no growth: EXT holds and the share of heavily infected cells falls.
#[test]
fn extinction_certified_model_loses_heavy_cells() {
    let spec = RunningExample { alpha_g: 0.0, alpha_sigma: 1.0, beta_sigma: 0.0, alpha: 0.0, beta: 1.0, alpha_q: 0.0, beta_q: 0.5 }.to_spec();
    let report = check_condition(&ConditionQuery::new(Assumption::Ext), &spec);
    assert!(report.is_holding(), "{report:?}");
    let es = scan(&spec, &[0.5, 1.0, 2.0], Functional::PropGeq(1.0), 21);
    assert_decreasing("E[1{N≥1} prop(X ≥ 1)]", &es);
}

//! Property suites shared by `tests/properties.rs` and the acceptance runner.
//!
//! Each suite drives a proptest runner with a fixed seed and returns the first failure.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use parasite_branching::analysis::lyapunov_search;
use parasite_branching::dynamics::{simulate_flow, IntegratorConfig};
use parasite_branching::model::{
    parse_model_config, to_toml, Expr, FunctionSpec, JumpMeasureSpec, KernelSpec, ModelSpec,
};
use parasite_branching::population::{run_population, sample_functionals_mc, Functional, PopulationCaps};
use parasite_branching::rng::{seeded, StreamSource};

pub const KERNEL_CASES: u32 = 24;
pub const POPULATION_CASES: u32 = 20;
pub const CHEAP_CASES: u32 = 64;

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- generators

pub fn kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::DiracHalf),
        Just(KernelSpec::Uniform),
        (0.3f64..6.0).prop_map(KernelSpec::SymmetricBeta),
        // Dyadic positions, so that 1 − (1 − t) == t and mirrored draws tie exactly.
        prop::collection::vec((6u32..128, 0.1f64..1.0), 1..4).prop_map(|pairs| {
            let total: f64 = pairs.iter().map(|p| 2.0 * p.1).sum();
            let mut atoms = Vec::new();
            for (m, w) in pairs {
                let t = m as f64 / 256.0;
                atoms.push((t, w / total));
                atoms.push((1.0 - t, w / total));
            }
            KernelSpec::atoms(atoms).expect("mirrored atoms are symmetric")
        }),
    ]
}

/// Random expression trees printed in the DSL's surface syntax.
pub fn expression_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (0.0f64..10.0).prop_map(|c| format!("{c}")),
        (1u32..5).prop_map(|k| k.to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} / ({b})")),
            (inner.clone(), 0u32..3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("exp(-({a}))")),
            inner.clone().prop_map(|a| format!("log(1 + ({a})^2)")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({a}, {b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({a}, {b})")),
        ]
    })
}

/// (g, α, β, q) with |g − β| bounded away from 0 and a noise level for σ²(x) = s·x.
pub fn ldcg_params() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.1f64..3.0, 0.2f64..2.0, 0.1f64..2.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_filter("g must differ from β", |(g, _, b, _, _)| (g - b).abs() > 0.05)
}

pub fn ldcg_spec(g: f64, alpha: f64, beta: f64, q: f64, s: f64, kappa: KernelSpec) -> ModelSpec {
    ModelSpec::default()
        .with_g(FunctionSpec::linear(g))
        .with_sigma2(FunctionSpec::linear(s))
        .with_r(FunctionSpec::affine(alpha, beta))
        .with_q(FunctionSpec::constant(q))
        .with_kappa(kappa)
}

// ---------------------------------------------------------------- suites

/// Θ and 1 − Θ have the same law: two-sample KS on independent samples of 10⁴, level 0.01,
/// plus pointwise density symmetry for the continuous families.
pub fn kernel_symmetry() -> Result<(), String> {
    const N: usize = 10_000;
    // c(0.01)·sqrt(2/N) for equal sample sizes.
    let critical = 1.628 * (2.0 / N as f64).sqrt();
    check(KERNEL_CASES, (kernel(), any::<u64>()), |(k, seed)| {
        let mut a: Vec<f64> = {
            let mut rng = seeded(seed);
            (0..N).map(|_| k.sample(&mut rng)).collect()
        };
        let mut b: Vec<f64> = {
            let mut rng = seeded(seed ^ 0x9e37_79b9_7f4a_7c15);
            (0..N).map(|_| 1.0 - k.sample(&mut rng)).collect()
        };
        prop_assert!(a.iter().all(|t| (0.0..=1.0).contains(t)));
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let d = ks_statistic(&a, &b);
        prop_assert!(d <= critical, "{k}: KS distance {d} > {critical}");
        for i in 1..20 {
            let t = i as f64 / 20.0;
            if let (Some(p), Some(q)) = (k.density(t), k.density(1.0 - t)) {
                prop_assert!((p - q).abs() <= 1e-12 * p.max(1.0), "{k}: density at {t}");
            }
        }
        Ok(())
    })
}

/// sup |F_a − F_b| for two sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Without flow and death, divisions only redistribute load: the total stays x0 to 10⁻¹².
pub fn mass_conservation() -> Result<(), String> {
    let strategy = (kernel(), 0.5f64..3.0, 0.0f64..1.0, 0.1f64..20.0, any::<u64>());
    check(POPULATION_CASES, strategy, |(k, r0, r1, x0, seed)| {
        let spec = ModelSpec::default().with_r(FunctionSpec::affine(r1, r0)).with_kappa(k);
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let caps = PopulationCaps { max_cells: 5_000, ..PopulationCaps::default() };
        let mut totals = Vec::new();
        let st = run_population(x0, 1.5, &spec, &cfg, &caps, &[0.5, 1.0, 1.5], &mut seeded(seed), |_, s| {
            totals.push((s.n(), s.loads().sum::<f64>()));
        })
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(st.n() >= 1);
        for (n, total) in totals {
            prop_assert!((total - x0).abs() <= 1e-12 * x0.max(1.0) * n as f64, "total {total} vs {x0} with {n} cells");
        }
        Ok(())
    })
}

/// A trajectory started at 0 stays at 0, and once a Feller path reaches 0 it stays there.
pub fn absorption_at_zero() -> Result<(), String> {
    let strategy = (0.0f64..2.0, 0.5f64..6.0, 0.0f64..0.3, any::<u64>());
    check(CHEAP_CASES, strategy, |(g, s, x0, seed)| {
        let spec = ModelSpec::default().with_g(FunctionSpec::linear(g)).with_sigma2(FunctionSpec::linear(s));
        let cfg = IntegratorConfig::default().with_dt(1e-3);
        let from_zero = simulate_flow(0.0, 0.0, 1.0, &spec, &cfg, &mut seeded(seed));
        prop_assert!(from_zero.values.iter().all(|&v| v == 0.0));
        let path = simulate_flow(x0, 0.0, 2.0, &spec, &cfg, &mut seeded(seed));
        prop_assert!(path.values.iter().all(|&v| v >= 0.0));
        if let Some(hit) = path.values.iter().position(|&v| v == 0.0) {
            prop_assert!(path.values[hit..].iter().all(|&v| v == 0.0), "left 0 after step {hit}");
        }
        Ok(())
    })
}

/// Same seed, same bits, regardless of the worker count.
pub fn determinism() -> Result<(), String> {
    let strategy = (ldcg_params(), kernel(), any::<u64>());
    check(POPULATION_CASES, strategy, |((g, a, b, q, s), k, seed)| {
        let spec = ldcg_spec(g, a, b, q, s, k);
        let cfg = IntegratorConfig::default().with_dt(0.01);
        let functionals = [Functional::Count, Functional::Sum(FunctionSpec::linear(1.0)), Functional::PropGeq(1.0)];
        let src = StreamSource::new(seed, "determinism");
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
            pool.install(|| {
                sample_functionals_mc(&spec, 1.0, &[0.3, 0.6], &functionals, 6, &cfg, &PopulationCaps::default(), &src)
            })
            .map(|s| s.values)
        };
        let one = run(1).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let three = run(3).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let bits = |v: &Vec<Vec<Vec<f64>>>| v.iter().flatten().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&one), bits(&three));
        let traj = |seed| simulate_flow(1.0, 0.0, 0.5, &spec, &cfg, &mut seeded(seed)).values;
        prop_assert_eq!(traj(seed), traj(seed));
        Ok(())
    })
}

/// parse ∘ print ∘ parse is the identity on trees, printed forms evaluate alike, and a
/// model built from expressions survives the config format.
pub fn dsl_round_trip() -> Result<(), String> {
    check(CHEAP_CASES, (expression_text(), any::<u64>()), |(text, seed)| {
        let tree = Expr::parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        let printed = tree.to_string();
        let again = Expr::parse(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(&again, &tree);
        let mut rng = seeded(seed);
        for _ in 0..1000 {
            let x: f64 = 20.0 * rand::Rng::random::<f64>(&mut rng);
            let (u, v) = (tree.eval(x), again.eval(x));
            prop_assert!(u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()), "{text} at {x}: {u} vs {v}");
        }
        let f = FunctionSpec::expression(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let spec = ModelSpec::default().with_q(f);
        let parsed = parse_model_config(&to_toml(&spec));
        if spec.validate().is_ok() {
            let parsed = parsed.map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(parsed.q.to_string(), spec.q.to_string());
        } else {
            // A rate that goes negative or non-finite must not survive loading.
            prop_assert!(parsed.is_err(), "{text}: invalid q was accepted from config");
        }
        Ok(())
    })
}

/// V(x) = x drift under the time-inhomogeneous spine, computed here from m(x,s) ∝ 1 + xA_s
/// with A_s = α(e^{(g−β)s} − 1)/(g − β):
/// gx + 2σ²(x)·A_s/(1 + xA_s) − 2(αx + β)·x·(E[1−Θ] + xA_s·E[Θ(1−Θ)])/(1 + xA_s).
pub fn oracle_drift(g: f64, alpha: f64, beta: f64, s2: f64, kappa: &KernelSpec, x: f64, s: f64) -> f64 {
    let a_s = alpha * ((g - beta) * s).exp_m1() / (g - beta);
    let k = a_s / (1.0 + x * a_s);
    let theta_var = match kappa {
        KernelSpec::DiracHalf => 0.25,
        KernelSpec::Uniform => 1.0 / 6.0,
        other => panic!("no closed form for {other}"),
    };
    g * x + 2.0 * s2 * x * k - 2.0 * (alpha * x + beta) * x * (0.5 + x * a_s * theta_var) / (1.0 + x * a_s)
}

/// The constants found by the search satisfy 𝒜V(x) ≤ −ax + d at every grid point and at
/// time-to-go values the search never looked at.
pub fn foster_lyapunov_drift() -> Result<(), String> {
    let kappa = prop_oneof![Just(KernelSpec::DiracHalf), Just(KernelSpec::Uniform)];
    let strategy = (ldcg_params(), kappa, prop::collection::vec(0.0f64..50.0, 8));
    check(KERNEL_CASES, strategy, |((g, alpha, beta, q, s), kappa, times)| {
        let spec = ldcg_spec(g, alpha, beta, q, s, kappa.clone());
        let c = lyapunov_search(&spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(c.a > 0.0 && c.d > 0.0);
        for &x in &c.grid {
            for &u in &times {
                let drift = oracle_drift(g, alpha, beta, s, &kappa, x, u);
                prop_assert!(drift <= -c.a * x + c.d, "x={x}, u={u}: {drift} > {}", -c.a * x + c.d);
            }
        }
        Ok(())
    })
}

/// The suites that make up the property criterion, in report order.
pub fn criterion_suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("kernel symmetry", kernel_symmetry),
        ("mass conservation at division", mass_conservation),
        ("absorption at 0", absorption_at_zero),
        ("determinism", determinism),
        ("DSL round trip", dsl_round_trip),
        ("Foster-Lyapunov drift on grid", foster_lyapunov_drift),
    ]
}

/// Exposed for suites that need a jump measure.
pub fn exponential_pi(mass: f64, rate: f64) -> JumpMeasureSpec {
    JumpMeasureSpec::exponential(mass, rate).expect("valid exponential measure")
}

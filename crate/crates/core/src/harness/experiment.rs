//! Experiment registry and the runner behind `verify`.
//!
//! An experiment is a preset, a kind, numeric knobs and a master seed. Replicate i of
//! experiment `id` always draws from `replicate_stream(seed, id-or-child, i)`, so results are
//! bitwise stable under any thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::presets::find_preset;
use crate::analysis::{check_condition, classify_running_example, non_redundancy_presets, Assumption, ClassifyOptions, ConditionQuery, MomentFormulas, Proposition};
use crate::auxiliary::{martingale_diagnostic, sandwich_summary, SpineStepper, SpineVariant};
use crate::dynamics::{time_grid, IntegratorConfig};
use crate::model::{FunctionSpec, ModelSpec, RunningExample};
use crate::population::{sample_functionals_mc, Functional, McSamples, PopulationCaps};
use crate::rng::StreamSource;
use crate::stats::{ratio_of_means, Estimate};
use crate::{Error, Result};

/// Standard errors allowed between a Monte Carlo estimate and its reference.
pub const SE_MULTIPLIER: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightedReference {
    /// E[Σ X_t^u] = x e^{𝔠t} under PGCD.
    TotalLoad,
    /// E[N_t] = x^α e^{λt} E[Y_t^{−α}] for the x^α-weighted spine under LGBE, α = α_γ.
    SpineIdentity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    VerifyMean,
    /// Transient E[N_t²] on `t_grid`; with `ratio_time`, also E[N²]/E[N]² against its limit.
    VerifySecondMoment { ratio_time: Option<f64>, ratio_rel_tol: f64 },
    /// Population against uniform spine for 1_{x>k} and min(x, cap); needs constant r and q.
    VerifyMto { k: f64, cap: f64 },
    VerifyWeightedMto { reference: WeightedReference },
    VerifyMartingale { a: f64, lower: f64, upper: f64 },
    /// Proportions below and above each K; with `decay_bound`, the LGBE tail bound too.
    ProportionScan { decay_bound: bool },
    /// E[1_{N≥1}·prop(X>0)²] must decrease along `t_grid`, first and last bands apart.
    ExtinctionScan,
    /// Fraction of coupled replicates with Ỹ ≤ Y ≤ Ŷ at every grid time.
    SandwichCheck { horizon: f64, min_ordered: f64 },
    ConditionAudit { expected: Vec<Proposition> },
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::VerifyMean => "verify-mean",
            ExperimentKind::VerifySecondMoment { .. } => "verify-second-moment",
            ExperimentKind::VerifyMto { .. } => "verify-mto",
            ExperimentKind::VerifyWeightedMto { .. } => "verify-weighted-mto",
            ExperimentKind::VerifyMartingale { .. } => "verify-martingale",
            ExperimentKind::ProportionScan { .. } => "proportion-scan",
            ExperimentKind::ExtinctionScan => "extinction-scan",
            ExperimentKind::SandwichCheck { .. } => "sandwich-check",
            ExperimentKind::ConditionAudit { .. } => "condition-audit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub kind: ExperimentKind,
    pub preset: String,
    pub x0: f64,
    pub t_grid: Vec<f64>,
    pub k_list: Vec<f64>,
    pub n_reps: usize,
    pub dt: f64,
    pub eps: f64,
    pub master_seed: u64,
    pub max_cells: usize,
}

/// Command-line overrides; `None` keeps the registered value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub k_list: Option<Vec<f64>>,
}

impl ExperimentSpec {
    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        if let Some(s) = o.seed {
            self.master_seed = s;
        }
        if let Some(n) = o.reps {
            self.n_reps = n;
        }
        if let Some(dt) = o.dt {
            self.dt = dt;
        }
        if let Some(e) = o.eps {
            self.eps = e;
        }
        if let Some(t) = &o.t_grid {
            self.t_grid = t.clone();
        }
        if let Some(k) = &o.k_list {
            self.k_list = k.clone();
        }
        self
    }

    fn integrator(&self) -> Result<IntegratorConfig> {
        let cfg = IntegratorConfig::default().with_dt(self.dt).with_eps(self.eps).with_seed(self.master_seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// |estimate − reference| ≤ tolerance
    Within,
    /// estimate ≤ reference + tolerance
    AtMost,
    /// estimate ≥ reference − tolerance
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultCell {
    pub label: String,
    pub t: Option<f64>,
    pub k: Option<f64>,
    pub estimate: Estimate,
    pub reference: f64,
    /// SE of a Monte Carlo reference; 0 for closed forms.
    pub reference_se: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Set when a replicate hit the population cap; such a cell always fails.
    pub capped: bool,
    pub pass: bool,
}

impl ResultCell {
    fn new(label: impl Into<String>, estimate: Estimate, reference: f64, reference_se: f64, tolerance: f64, comparison: Comparison) -> Self {
        let m = estimate.mean;
        let pass = m.is_finite()
            && reference.is_finite()
            && match comparison {
                Comparison::Within => (m - reference).abs() <= tolerance,
                Comparison::AtMost => m <= reference + tolerance,
                Comparison::AtLeast => m >= reference - tolerance,
            };
        ResultCell { label: label.into(), t: None, k: None, estimate, reference, reference_se, tolerance, comparison, capped: false, pass }
    }

    /// MC estimate against a closed form, tolerance 3·SE.
    pub fn against_closed_form(label: impl Into<String>, estimate: Estimate, reference: f64) -> Self {
        Self::new(label, estimate, reference, 0.0, SE_MULTIPLIER * estimate.se, Comparison::Within)
    }

    /// Two independent MC estimates, tolerance 3·combined SE.
    pub fn against_estimate(label: impl Into<String>, estimate: Estimate, reference: Estimate) -> Self {
        Self::new(label, estimate, reference.mean, reference.se, SE_MULTIPLIER * estimate.se.hypot(reference.se), Comparison::Within)
    }

    pub fn within(label: impl Into<String>, estimate: Estimate, reference: f64, tolerance: f64) -> Self {
        Self::new(label, estimate, reference, 0.0, tolerance, Comparison::Within)
    }

    pub fn at_most(label: impl Into<String>, estimate: Estimate, bound: f64, tolerance: f64) -> Self {
        Self::new(label, estimate, bound, 0.0, tolerance, Comparison::AtMost)
    }

    pub fn at_least(label: impl Into<String>, estimate: Estimate, bound: f64, tolerance: f64) -> Self {
        Self::new(label, estimate, bound, 0.0, tolerance, Comparison::AtLeast)
    }

    pub fn at(mut self, t: Option<f64>, k: Option<f64>) -> Self {
        self.t = t;
        self.k = k;
        self
    }

    fn flag_capped(mut self, capped: bool) -> Self {
        if capped {
            self.capped = true;
            self.pass = false;
        }
        self
    }
}

/// A time series drawn as one SVG chart: (t, mean, se) with t strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub k: Option<f64>,
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub id: String,
    pub kind: &'static str,
    pub preset: String,
    pub spec: ExperimentSpec,
    pub cells: Vec<ResultCell>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    pub capped_replicates: usize,
    pub pass: bool,
    pub wall_clock_seconds: f64,
}

impl ExperimentResult {
    pub fn failed_cells(&self) -> impl Iterator<Item = &ResultCell> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

fn experiment(id: &str, kind: ExperimentKind, preset: &str, t_grid: &[f64], k_list: &[f64], n_reps: usize) -> ExperimentSpec {
    ExperimentSpec {
        id: id.into(),
        kind,
        preset: preset.into(),
        x0: 1.0,
        t_grid: t_grid.to_vec(),
        k_list: k_list.to_vec(),
        n_reps,
        dt: 1e-3,
        eps: 1e-3,
        master_seed: 20_240_917,
        max_cells: 1_000_000,
    }
}

/// Registered experiments at their acceptance sizes.
pub fn registry() -> Vec<ExperimentSpec> {
    use ExperimentKind as K;
    let mut out = vec![
        experiment("mean-ldcg", K::VerifyMean, "ldcg", &[0.5, 1.0, 1.5], &[], 20_000),
        experiment(
            "second-moment-ldcg",
            K::VerifySecondMoment { ratio_time: None, ratio_rel_tol: 0.0 },
            "ldcg",
            &[0.5, 1.0],
            &[],
            20_000,
        ),
        experiment(
            "second-moment-ratio",
            K::VerifySecondMoment { ratio_time: Some(3.0), ratio_rel_tol: 0.15 },
            "ldcg-division-led",
            &[],
            &[],
            5_000,
        ),
        experiment("mto-constant-rates", K::VerifyMto { k: 1.0, cap: 10.0 }, "constant-rates", &[1.0], &[], 20_000),
        experiment(
            "weighted-mto-pgcd",
            K::VerifyWeightedMto { reference: WeightedReference::TotalLoad },
            "pgcd",
            &[0.5, 1.0],
            &[],
            10_000,
        ),
        experiment(
            "weighted-mto-lgbe",
            K::VerifyWeightedMto { reference: WeightedReference::SpineIdentity },
            "lgbe",
            &[0.5, 1.0],
            &[],
            10_000,
        ),
        experiment(
            "martingale-halving",
            K::VerifyMartingale { a: 2.0, lower: 0.05, upper: 20.0 },
            "halving-balance",
            &[0.0, 0.25, 0.5, 1.0],
            &[],
            10_000,
        ),
        experiment(
            "martingale-generic",
            K::VerifyMartingale { a: 0.5, lower: 0.1, upper: 10.0 },
            "diffusive-generic",
            &[0.0, 0.25, 0.5, 1.0],
            &[],
            10_000,
        ),
        experiment("decay-bound-lgbe", K::ProportionScan { decay_bound: true }, "lgbe", &[0.5, 1.0], &[5.0, 10.0], 10_000),
        experiment(
            "sandwich-ldcg-plus-plus",
            K::SandwichCheck { horizon: 1.0, min_ordered: 0.999 },
            "ldcg-plus-plus",
            &[],
            &[],
            1_000,
        ),
        experiment("extinction-feller", K::ExtinctionScan, "feller", &[1.0, 2.0, 4.0], &[], 2_000),
    ];
    for p in non_redundancy_presets() {
        out.push(experiment(&format!("audit-{}", p.name), K::ConditionAudit { expected: vec![p.expected] }, p.name, &[], &[], 0));
    }
    out
}

pub fn find_experiment(id: &str) -> Result<ExperimentSpec> {
    registry().into_iter().find(|e| e.id == id).ok_or_else(|| {
        let ids: Vec<String> = registry().into_iter().map(|e| e.id).collect();
        Error::config("experiment", format!("unknown experiment `{id}`; known: all, {}", ids.join(", ")))
    })
}

/// The named experiment, or every registered one for `all`.
pub fn select_experiments(id: &str) -> Result<Vec<ExperimentSpec>> {
    if id == "all" {
        Ok(registry())
    } else {
        Ok(vec![find_experiment(id)?])
    }
}

fn prerequisite(assumption: Assumption, spec: &ModelSpec) -> Result<crate::analysis::ConditionReport> {
    let report = check_condition(&ConditionQuery::new(assumption), spec);
    if report.is_holding() {
        return Ok(report);
    }
    let failing: Vec<&str> = report.clauses.iter().filter(|c| !c.is_holding()).map(|c| c.condition.as_str()).collect();
    let detail = if failing.is_empty() { report.note.clone().unwrap_or_default() } else { failing.join("; ") };
    Err(Error::Precondition(format!("prerequisite failed: {} does not hold ({detail})", report.condition)))
}

fn witness(report: &crate::analysis::ConditionReport, name: &str) -> Result<f64> {
    report
        .witnesses
        .get(name)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("{} did not report `{name}`", report.condition)))
}

fn need_times(spec: &ExperimentSpec, min: usize) -> Result<()> {
    if spec.t_grid.len() < min {
        return Err(Error::Precondition(format!("{} needs at least {min} time(s) in t_grid", spec.id)));
    }
    if spec.t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Precondition("t_grid entries must be finite and ≥ 0".into()));
    }
    Ok(())
}

/// Spine samples f(t, Y_t) for every t in `times`: `out[i][rep]`.
#[allow(clippy::too_many_arguments)]
fn spine_samples(
    variant: SpineVariant,
    y0: f64,
    times: &[f64],
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    n_reps: usize,
    source: &StreamSource,
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
) -> Result<Vec<Vec<f64>>> {
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let grid = time_grid(0.0, horizon, cfg.dt, times);
    let slots: Vec<usize> = times
        .iter()
        .map(|&t| grid.iter().position(|&g| (g - t).abs() <= 1e-12 * t.max(1.0)).expect("requested times are on the grid"))
        .collect();
    let per_rep: Vec<Vec<f64>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut rng = source.stream(i);
            let mut stepper = SpineStepper::new(variant, spec, cfg)?;
            let mut path = Vec::with_capacity(grid.len());
            let mut y = y0;
            path.push(y);
            for w in grid.windows(2) {
                y = stepper.step(y, w[0], w[1] - w[0], &mut rng);
                path.push(y);
            }
            Ok(slots.iter().zip(times).map(|(&s, &t)| f(t, path[s])).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len()).map(|i| per_rep.iter().map(|r| r[i]).collect()).collect())
}

fn series_of(name: String, k: Option<f64>, samples: &McSamples, j: usize) -> Series {
    let points = samples
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let e = samples.estimate(i, j);
            (t, e.mean, e.se)
        })
        .collect();
    Series { name, k, points }
}

struct Outcome {
    cells: Vec<ResultCell>,
    series: Vec<Series>,
    notes: Vec<String>,
    capped: usize,
}

impl Outcome {
    fn cells(cells: Vec<ResultCell>) -> Self {
        Outcome { cells, series: Vec::new(), notes: Vec::new(), capped: 0 }
    }
}

/// Runs one experiment. Prerequisite failures are errors naming the assumption; capped
/// replicates surface as failed cells.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let started = Instant::now();
    let preset = find_preset(&spec.preset)?;
    let model = preset.spec.validated()?;
    let cfg = spec.integrator()?;
    let caps = PopulationCaps { max_cells: spec.max_cells, ..PopulationCaps::default() };
    let source = StreamSource::new(spec.master_seed, spec.id.clone());
    let x0 = spec.x0;

    let population = |times: &[f64], functionals: &[Functional], src: &StreamSource| {
        sample_functionals_mc(&model, x0, times, functionals, spec.n_reps, &cfg, &caps, src)
    };

    let outcome = match &spec.kind {
        ExperimentKind::VerifyMean => {
            prerequisite(Assumption::Ldcg, &model)?;
            need_times(spec, 1)?;
            let mf = MomentFormulas::from_spec(&model)?;
            let s = population(&spec.t_grid, &[Functional::Count], &source)?;
            let capped = s.capped_replicates > 0;
            let cells = spec
                .t_grid
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    ResultCell::against_closed_form("E[N_t]", s.estimate(i, 0), mf.mean(x0, 0.0, t))
                        .at(Some(t), None)
                        .flag_capped(capped)
                })
                .collect();
            Outcome { capped: s.capped_replicates, ..Outcome::cells(cells) }
        }
        ExperimentKind::VerifySecondMoment { ratio_time, ratio_rel_tol } => {
            prerequisite(Assumption::Ldcg, &model)?;
            let mf = MomentFormulas::from_spec(&model)?;
            let mut cells = Vec::new();
            let mut capped = 0;
            if !spec.t_grid.is_empty() {
                need_times(spec, 1)?;
                let s = population(&spec.t_grid, &[Functional::CountSquared], &source)?;
                capped += s.capped_replicates;
                for (i, &t) in spec.t_grid.iter().enumerate() {
                    cells.push(
                        ResultCell::against_closed_form("E[N_t^2]", s.estimate(i, 0), mf.second_moment(x0, t))
                            .at(Some(t), None)
                            .flag_capped(s.capped_replicates > 0),
                    );
                }
            }
            if let Some(t) = *ratio_time {
                let limit = mf.asymptotic_ratio(x0)?;
                let s = population(&[t], &[Functional::Count, Functional::CountSquared], &source.child("ratio"))?;
                capped += s.capped_replicates;
                let n = &s.values[0][0];
                let n2 = &s.values[0][1];
                // E[N²]/E[N]² = ratio_of_means(N², N)/E[N]; the SE below is the delta method on both.
                let en = Estimate::from_samples(n);
                let en2 = Estimate::from_samples(n2);
                let ratio = en2.mean / (en.mean * en.mean);
                let rel = (en2.se / en2.mean).hypot(2.0 * en.se / en.mean);
                let est = Estimate { mean: ratio, se: ratio * rel, n: en.n };
                cells.push(
                    ResultCell::within("E[N_t^2]/E[N_t]^2", est, limit, ratio_rel_tol * limit)
                        .at(Some(t), None)
                        .flag_capped(s.capped_replicates > 0),
                );
            }
            if cells.is_empty() {
                return Err(Error::Precondition(format!("{} has neither t_grid nor a ratio time", spec.id)));
            }
            Outcome { capped, ..Outcome::cells(cells) }
        }
        ExperimentKind::VerifyMto { k, cap } => {
            let (r0, q0) = match (model.r.constant_value(), model.q.constant_value()) {
                (Some(r), Some(q)) => (r, q),
                _ => {
                    return Err(Error::Precondition(
                        "prerequisite failed: constant division and death rates are required".into(),
                    ))
                }
            };
            need_times(spec, 1)?;
            let (k, cap) = (*k, *cap);
            let clipped = FunctionSpec::expression(&format!("min(x, {cap})"))?;
            let s = population(&spec.t_grid, &[Functional::CountAbove(k), Functional::Sum(clipped)], &source)?;
            let indicator = spine_samples(
                SpineVariant::Uniform,
                x0,
                &spec.t_grid,
                &model,
                &cfg,
                spec.n_reps,
                &source.child("spine"),
                &|_, y| f64::from(y > k),
            )?;
            let clipped = spine_samples(
                SpineVariant::Uniform,
                x0,
                &spec.t_grid,
                &model,
                &cfg,
                spec.n_reps,
                &source.child("spine-min"),
                &|_, y| y.min(cap),
            )?;
            let mut cells = Vec::new();
            for (i, &t) in spec.t_grid.iter().enumerate() {
                let growth = (-(r0 - q0) * t).exp();
                let capped = s.capped_replicates > 0;
                cells.push(
                    ResultCell::against_estimate(format!("1{{x>{k}}}"), s.estimate(i, 0).scaled(growth), Estimate::from_samples(&indicator[i]))
                        .at(Some(t), Some(k))
                        .flag_capped(capped),
                );
                cells.push(
                    ResultCell::against_estimate(format!("min(x,{cap})"), s.estimate(i, 1).scaled(growth), Estimate::from_samples(&clipped[i]))
                        .at(Some(t), None)
                        .flag_capped(capped),
                );
            }
            Outcome { capped: s.capped_replicates, ..Outcome::cells(cells) }
        }
        ExperimentKind::VerifyWeightedMto { reference } => {
            need_times(spec, 1)?;
            match reference {
                WeightedReference::TotalLoad => {
                    let report = prerequisite(Assumption::Pgcd, &model)?;
                    let c = witness(&report, "c_frak")?;
                    let s = population(&spec.t_grid, &[Functional::Sum(FunctionSpec::linear(1.0))], &source)?;
                    let cells = spec
                        .t_grid
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| {
                            ResultCell::against_closed_form("E[sum X_t]", s.estimate(i, 0), x0 * (c * t).exp())
                                .at(Some(t), None)
                                .flag_capped(s.capped_replicates > 0)
                        })
                        .collect();
                    Outcome { capped: s.capped_replicates, ..Outcome::cells(cells) }
                }
                WeightedReference::SpineIdentity => {
                    let report = prerequisite(Assumption::Lgbe, &model)?;
                    let (g, s2, c) = (witness(&report, "g")?, witness(&report, "sigma2")?, witness(&report, "c_frak")?);
                    let a = witness(&report, "alpha_gamma")?;
                    let lambda = a * g + a * (a - 1.0) * s2 + c;
                    let pop = population(&spec.t_grid, &[Functional::Count], &source)?;
                    let spine = spine_samples(
                        SpineVariant::Weighted { alpha: a },
                        x0,
                        &spec.t_grid,
                        &model,
                        &cfg,
                        spec.n_reps,
                        &source.child("weighted-spine"),
                        &|t, y| x0.powf(a) * (lambda * t).exp() * y.powf(-a),
                    )?;
                    let cells = spec
                        .t_grid
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| {
                            ResultCell::against_estimate("E[N_t]", pop.estimate(i, 0), Estimate::from_samples(&spine[i]))
                                .at(Some(t), None)
                                .flag_capped(pop.capped_replicates > 0)
                        })
                        .collect();
                    let mut o = Outcome::cells(cells);
                    o.capped = pop.capped_replicates;
                    o.notes.push(format!("alpha_gamma = {a}, lambda = {lambda}"));
                    o
                }
            }
        }
        ExperimentKind::VerifyMartingale { a, lower, upper } => {
            need_times(spec, 1)?;
            let table = martingale_diagnostic(*a, x0, *lower, *upper, &spec.t_grid, &model, spec.n_reps, &cfg, &source)?;
            let cells = table
                .rows
                .iter()
                .map(|r| ResultCell::against_closed_form("E[Z_{t^T}]", r.estimate, table.reference).at(Some(r.t), None))
                .collect();
            let mut o = Outcome::cells(cells);
            o.notes.push(format!(
                "stopped fraction by t: {}",
                table.rows.iter().map(|r| format!("{}:{:.3}", r.t, r.stopped)).collect::<Vec<_>>().join(" ")
            ));
            o
        }
        ExperimentKind::ProportionScan { decay_bound } => {
            need_times(spec, 1)?;
            if spec.k_list.is_empty() {
                return Err(Error::Precondition(format!("{} needs a nonempty K list", spec.id)));
            }
            let bound = if *decay_bound {
                let report = prerequisite(Assumption::Lgbe, &model)?;
                let (g, s2, a) = (witness(&report, "g")?, witness(&report, "sigma2")?, witness(&report, "alpha_gamma")?);
                if !(s2 > 0.0 && a < 1.0 - g / s2) {
                    return Err(Error::Precondition(format!(
                        "prerequisite failed: alpha_gamma = {a} must lie below 1 - g/sigma2 = {}",
                        1.0 - g / s2
                    )));
                }
                Some((a, g, s2))
            } else {
                None
            };
            let mut functionals = vec![Functional::Count];
            for &k in &spec.k_list {
                functionals.extend([Functional::PropLeq(k), Functional::PropGeq(k), Functional::CountAbove(k)]);
            }
            let s = population(&spec.t_grid, &functionals, &source)?;
            let capped = s.capped_replicates > 0;
            let mut o = Outcome::cells(Vec::new());
            o.capped = s.capped_replicates;
            for (j, &k) in spec.k_list.iter().enumerate() {
                let base = 1 + 3 * j;
                o.series.push(series_of(format!("prop(X<={k})"), Some(k), &s, base));
                o.series.push(series_of(format!("prop(X>={k})"), Some(k), &s, base + 1));
                for (i, &t) in spec.t_grid.iter().enumerate() {
                    let leq = s.estimate(i, base);
                    let geq = s.estimate(i, base + 1);
                    // Both proportions live in [0, 1]; these cells only fail on capped runs.
                    o.cells.push(ResultCell::within(format!("prop(X<={k})"), leq, 0.5, 0.5).at(Some(t), Some(k)).flag_capped(capped));
                    o.cells.push(ResultCell::within(format!("prop(X>={k})"), geq, 0.5, 0.5).at(Some(t), Some(k)).flag_capped(capped));
                    if let Some((a, g, s2)) = bound {
                        let ratio = ratio_of_means(&s.values[i][base + 2], &s.values[i][0]);
                        let b = (x0 / k).powf(a) * (a * (g + (a - 1.0) * s2) * t).exp();
                        o.cells.push(
                            ResultCell::at_most("E[count(X>K)]/E[N_t]", ratio, b, SE_MULTIPLIER * ratio.se)
                                .at(Some(t), Some(k))
                                .flag_capped(capped),
                        );
                    }
                }
            }
            o
        }
        ExperimentKind::ExtinctionScan => {
            need_times(spec, 2)?;
            if spec.t_grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Precondition("extinction scan times must increase".into()));
            }
            let s = population(&spec.t_grid, &[Functional::PropGtSquared(0.0)], &source)?;
            let capped = s.capped_replicates > 0;
            let est: Vec<Estimate> = (0..spec.t_grid.len()).map(|i| s.estimate(i, 0)).collect();
            let mut o = Outcome::cells(Vec::new());
            o.capped = s.capped_replicates;
            o.series.push(series_of("prop(X>0)^2".into(), None, &s, 0));
            for (w, tw) in est.windows(2).zip(spec.t_grid.windows(2)) {
                let drop = Estimate { mean: w[0].mean - w[1].mean, se: w[0].se.hypot(w[1].se), n: w[0].n };
                o.cells.push(ResultCell::at_least("decrease", drop, 0.0, 0.0).at(Some(tw[1]), None).flag_capped(capped));
            }
            let (first, last) = (est[0], est[est.len() - 1]);
            let gap = Estimate { mean: first.mean - last.mean, se: first.se.hypot(last.se), n: first.n };
            o.cells.push(
                ResultCell::at_least("band separation", gap, SE_MULTIPLIER * (first.se + last.se), 0.0)
                    .at(spec.t_grid.last().copied(), None)
                    .flag_capped(capped),
            );
            o
        }
        ExperimentKind::SandwichCheck { horizon, min_ordered } => {
            prerequisite(Assumption::LdcgPlusPlus, &model)?;
            let summary = sandwich_summary(x0, *horizon, &model, &cfg, spec.n_reps, spec.master_seed, &spec.id)?;
            let n = summary.replicates as f64;
            let frac = summary.ordered_replicates() as f64 / n;
            let bar = (summary.replicates - summary.bar_violating_replicates) as f64 / n;
            let mut o = Outcome::cells(vec![
                ResultCell::at_least("ordered fraction tilde<=exact<=hat", Estimate { mean: frac, se: 0.0, n: summary.replicates }, *min_ordered, 0.0)
                    .at(Some(*horizon), None),
            ]);
            o.notes.push(format!(
                "{} of {} replicates ordered; exact<=bar held in {:.4}; worst gap {:.3e}",
                summary.ordered_replicates(),
                summary.replicates,
                bar,
                summary.worst_gap
            ));
            o
        }
        ExperimentKind::ConditionAudit { expected } => {
            let params = RunningExample::from_spec(&model)
                .ok_or_else(|| Error::Precondition(format!("preset {} is not a running-example instance", spec.preset)))?;
            let got = classify_running_example(&params, &ClassifyOptions::default());
            let props: Vec<Proposition> = got.iter().map(|a| a.proposition).collect();
            let mut want = expected.clone();
            want.sort();
            let mut have = props.clone();
            have.sort();
            let matches = f64::from(want == have);
            let mut o = Outcome::cells(vec![ResultCell::within("applicable set matches", Estimate::exact(matches), 1.0, 0.0)]);
            for a in &got {
                o.notes.push(format!("{}: {}", a.proposition.label(), a.trigger));
            }
            if got.is_empty() {
                o.notes.push("no proposition applies".into());
            }
            o
        }
    };

    let pass = !outcome.cells.is_empty() && outcome.cells.iter().all(|c| c.pass);
    Ok(ExperimentResult {
        id: spec.id.clone(),
        kind: spec.kind.label(),
        preset: spec.preset.clone(),
        spec: spec.clone(),
        cells: outcome.cells,
        series: outcome.series,
        notes: outcome.notes,
        capped_replicates: outcome.capped,
        pass,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_presets_exist() {
        let reg = registry();
        let mut ids: Vec<&str> = reg.iter().map(|e| e.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), reg.len());
        for e in &reg {
            find_preset(&e.preset).unwrap();
        }
        assert!(find_experiment("all").is_err());
        assert_eq!(select_experiments("all").unwrap().len(), reg.len());
    }

    #[test]
    fn martingale_on_time_zero_only_is_trivially_constant() {
        let spec = find_experiment("martingale-generic").unwrap().with_overrides(&Overrides {
            t_grid: Some(vec![0.0]),
            reps: Some(50),
            ..Overrides::default()
        });
        let r = run_experiment(&spec).unwrap();
        assert!(r.pass);
        assert_eq!(r.cells.len(), 1);
    }

    #[test]
    fn verify_mean_rejects_a_non_ldcg_preset() {
        let mut spec = find_experiment("mean-ldcg").unwrap();
        spec.preset = "constant-rates".into();
        let err = run_experiment(&spec).unwrap_err();
        assert!(err.to_string().contains("prerequisite failed: LDCG"), "{err}");
    }

    #[test]
    fn capped_replicates_fail_their_cells() {
        let mut spec = find_experiment("mean-ldcg").unwrap().with_overrides(&Overrides {
            reps: Some(20),
            t_grid: Some(vec![1.5]),
            ..Overrides::default()
        });
        spec.max_cells = 2;
        let r = run_experiment(&spec).unwrap();
        assert!(r.capped_replicates > 0);
        assert!(r.cells.iter().all(|c| c.capped && !c.pass));
        assert!(!r.pass);
    }

    #[test]
    fn cell_comparisons() {
        let e = Estimate { mean: 1.0, se: 0.1, n: 10 };
        assert!(ResultCell::against_closed_form("x", e, 1.29).pass);
        assert!(!ResultCell::against_closed_form("x", e, 1.31).pass);
        assert!(ResultCell::at_most("x", e, 0.9, 0.1).pass);
        assert!(!ResultCell::at_least("x", e, 1.2, 0.1).pass);
    }
}

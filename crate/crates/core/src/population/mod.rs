//! The branching particle system: cells carry load flows, divide at rate
//! r(X), die at rate q(X) and share their load by κ at division.
//!
//! Stepping is first order in dt. Over each step a cell first advances its
//! load, then two exponential clocks with rates frozen at the step start
//! decide whether it divides, dies, or neither; only the earlier clock fires.
//! Every cell owns a generator split off its parent's, so a label receives
//! identical noise in any two runs where it exists. Raising q pointwise
//! therefore only ever removes cells.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{time_grid, IntegratorConfig, Stepper};
use crate::model::{FunctionSpec, ModelSpec};
use crate::rng::{split_cell_rng, CellRng, StreamSource};
use crate::stats::Estimate;
use crate::{Error, Result};

/// Ulam–Harris–Neveu label: a word over {0, 1}; the root is the empty word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellLabel(Vec<u8>);

impl CellLabel {
    pub fn root() -> Self {
        CellLabel(Vec::new())
    }

    pub fn child(&self, i: u8) -> Self {
        debug_assert!(i < 2);
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(b'0' + i);
        CellLabel(v)
    }

    pub fn parent(&self) -> Option<Self> {
        (!self.0.is_empty()).then(|| CellLabel(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("labels are ASCII")
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = if s == "∅" { "" } else { s };
        s.bytes().all(|b| b == b'0' || b == b'1').then(|| CellLabel(s.as_bytes().to_vec()))
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(self.as_str())
        }
    }
}

impl Serialize for CellLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub label: CellLabel,
    pub load: f64,
    pub birth_time: f64,
    rng: CellRng,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Division,
    Death,
    /// A division suppressed because the population had reached its cap.
    CapTruncation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Event {
    pub time: f64,
    pub label: CellLabel,
    pub kind: EventKind,
    /// Parent load at the event (after the step's flow increment).
    pub load: f64,
    pub theta: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PopulationState {
    pub time: f64,
    pub living: Vec<Cell>,
    pub event_log: Vec<Event>,
    /// Time at which the cell cap was first reached.
    pub capped_at: Option<f64>,
}

impl PopulationState {
    pub fn n(&self) -> usize {
        self.living.len()
    }

    pub fn is_capped(&self) -> bool {
        self.capped_at.is_some()
    }

    pub fn loads(&self) -> impl Iterator<Item = f64> + '_ {
        self.living.iter().map(|c| c.load)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PopulationCaps {
    pub max_cells: usize,
    /// Rates are evaluated at min(x, trait_cap), which keeps them finite on exploded loads.
    pub trait_cap: f64,
    pub record_events: bool,
}

impl Default for PopulationCaps {
    fn default() -> Self {
        PopulationCaps { max_cells: 1_000_000, trait_cap: crate::dynamics::DEFAULT_EXPLOSION_CAP, record_events: false }
    }
}

/// Snapshot statistics. Normalized quantities carry the factor 1_{N ≥ 1}.
#[derive(Clone, Debug, Serialize)]
pub struct PopulationStatistics {
    pub time: f64,
    pub n: usize,
    pub total_parasites: f64,
    pub k_list: Vec<f64>,
    pub prop_leq_k: Vec<f64>,
    pub prop_geq_k: Vec<f64>,
    pub prop_gt_k: Vec<f64>,
    /// Empirical 10%, 50% and 90% load quantiles (NaN when empty).
    pub quantiles: [f64; 3],
    pub capped: bool,
}

impl PopulationStatistics {
    pub fn of(time: f64, loads: &[f64], k_list: &[f64], capped: bool) -> Self {
        let n = loads.len();
        let frac = |pred: &dyn Fn(f64) -> bool| -> f64 {
            if n == 0 {
                0.0
            } else {
                loads.iter().filter(|&&x| pred(x)).count() as f64 / n as f64
            }
        };
        let mut sorted = loads.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quant = |p: f64| {
            if n == 0 {
                f64::NAN
            } else {
                sorted[((p * (n - 1) as f64).round() as usize).min(n - 1)]
            }
        };
        PopulationStatistics {
            time,
            n,
            total_parasites: loads.iter().sum(),
            k_list: k_list.to_vec(),
            prop_leq_k: k_list.iter().map(|&k| frac(&|x| x <= k)).collect(),
            prop_geq_k: k_list.iter().map(|&k| frac(&|x| x >= k)).collect(),
            prop_gt_k: k_list.iter().map(|&k| frac(&|x| x > k)).collect(),
            quantiles: [quant(0.1), quant(0.5), quant(0.9)],
            capped,
        }
    }
}

/// A finished run: the final state and statistics at the requested times.
#[derive(Clone, Debug)]
pub struct PopulationRun {
    pub state: PopulationState,
    pub samples: Vec<PopulationStatistics>,
}

/// Root of a run's cell streams; replays of the root trait with
/// `simulate_flow` must draw from this generator.
pub fn root_cell_rng<R: Rng + ?Sized>(rng: &mut R) -> CellRng {
    split_cell_rng(rng)
}

/// Runs the population on [0, T], calling `observe` at every requested sample time.
pub fn run_population<R, O>(
    x0: f64,
    horizon: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    caps: &PopulationCaps,
    sample_times: &[f64],
    rng: &mut R,
    mut observe: O,
) -> Result<PopulationState>
where
    R: Rng + ?Sized,
    O: FnMut(f64, &PopulationState),
{
    if !(x0 >= 0.0) || !(horizon >= 0.0) {
        return Err(Error::Precondition(format!("need x0 ≥ 0 and T ≥ 0, got ({x0}, {horizon})")));
    }
    cfg.validate()?;
    let stepper = Stepper::new(spec, *cfg);
    let branching = !(spec.r.is_identically_zero() && spec.q.is_identically_zero());
    let mut state = PopulationState {
        time: 0.0,
        living: vec![Cell { label: CellLabel::root(), load: x0, birth_time: 0.0, rng: root_cell_rng(rng) }],
        event_log: Vec::new(),
        capped_at: None,
    };
    let mut wanted: Vec<f64> = sample_times.iter().copied().filter(|&t| t >= 0.0 && t <= horizon).collect();
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    let mut next_sample = 0;
    while next_sample < wanted.len() && wanted[next_sample] <= 0.0 {
        observe(0.0, &state);
        next_sample += 1;
    }
    let grid = time_grid(0.0, horizon, cfg.dt, &wanted);
    let mut next_gen: Vec<Cell> = Vec::new();
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        next_gen.clear();
        next_gen.reserve(state.living.len());
        let mut alive = state.living.len();
        for mut cell in state.living.drain(..) {
            let xr = cell.load.min(caps.trait_cap);
            let (r, q) = if branching { (spec.r.eval(xr), spec.q.eval(xr)) } else { (0.0, 0.0) };
            cell.load = stepper.step(cell.load, h, &mut cell.rng);
            if !branching {
                next_gen.push(cell);
                continue;
            }
            let er: f64 = Exp1.sample(&mut cell.rng);
            let eq: f64 = Exp1.sample(&mut cell.rng);
            let tr = if r > 0.0 { er / r } else { f64::INFINITY };
            let tq = if q > 0.0 { eq / q } else { f64::INFINITY };
            if tq < tr && tq < h {
                alive -= 1;
                if caps.record_events {
                    state.event_log.push(Event { time: t1, label: cell.label, kind: EventKind::Death, load: cell.load, theta: None });
                }
            } else if tr < h {
                if alive >= caps.max_cells {
                    state.capped_at.get_or_insert(t1);
                    if caps.record_events {
                        state.event_log.push(Event {
                            time: t1,
                            label: cell.label.clone(),
                            kind: EventKind::CapTruncation,
                            load: cell.load,
                            theta: None,
                        });
                    }
                    next_gen.push(cell);
                    continue;
                }
                alive += 1;
                let theta = spec.kappa.sample(&mut cell.rng);
                let x = cell.load;
                // Conserve mass exactly: the second daughter gets the remainder.
                let x0d = theta * x;
                let x1d = if x.is_finite() { x - x0d } else { x };
                let rng0 = split_cell_rng(&mut cell.rng);
                let rng1 = split_cell_rng(&mut cell.rng);
                let (l0, l1) = (cell.label.child(0), cell.label.child(1));
                if caps.record_events {
                    state.event_log.push(Event { time: t1, label: cell.label, kind: EventKind::Division, load: x, theta: Some(theta) });
                }
                next_gen.push(Cell { label: l0, load: x0d, birth_time: t1, rng: rng0 });
                next_gen.push(Cell { label: l1, load: x1d, birth_time: t1, rng: rng1 });
            } else {
                next_gen.push(cell);
            }
        }
        std::mem::swap(&mut state.living, &mut next_gen);
        state.time = t1;
        while next_sample < wanted.len() && wanted[next_sample] <= t1 + 1e-12 {
            observe(wanted[next_sample], &state);
            next_sample += 1;
        }
    }
    Ok(state)
}

/// Simulates the population and collects statistics at `sample_times` for each K in `k_list`.
pub fn simulate_population<R: Rng + ?Sized>(
    x0: f64,
    horizon: f64,
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    caps: &PopulationCaps,
    sample_times: &[f64],
    k_list: &[f64],
    rng: &mut R,
) -> Result<PopulationRun> {
    let mut samples = Vec::new();
    let mut loads = Vec::new();
    let state = run_population(x0, horizon, spec, cfg, caps, sample_times, rng, |t, st| {
        loads.clear();
        loads.extend(st.loads());
        samples.push(PopulationStatistics::of(t, &loads, k_list, st.is_capped()));
    })?;
    Ok(PopulationRun { state, samples })
}

/// Replays an event log from a single root cell; returns the surviving labels, sorted.
pub fn replay_labels(events: &[Event]) -> Result<Vec<CellLabel>> {
    let mut living = std::collections::BTreeSet::from([CellLabel::root()]);
    for e in events {
        match e.kind {
            EventKind::CapTruncation => {}
            EventKind::Death => {
                if !living.remove(&e.label) {
                    return Err(Error::Invariant(format!("death of absent cell {}", e.label)));
                }
            }
            EventKind::Division => {
                if !living.remove(&e.label) {
                    return Err(Error::Invariant(format!("division of absent cell {}", e.label)));
                }
                for i in 0..2 {
                    if !living.insert(e.label.child(i)) {
                        return Err(Error::Invariant(format!("duplicate label {}", e.label.child(i))));
                    }
                }
            }
        }
    }
    Ok(living.into_iter().collect())
}

/// Population functionals estimated by Monte Carlo.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// N_t
    Count,
    /// N_t²
    CountSquared,
    /// Σ_u f(X_t^u)
    Sum(FunctionSpec),
    /// Σ_u 1{X_t^u > K}
    CountAbove(f64),
    /// 1_{N≥1}·#{X ≤ K}/N
    PropLeq(f64),
    /// 1_{N≥1}·#{X ≥ K}/N
    PropGeq(f64),
    /// 1_{N≥1}·(#{X > K}/N)²
    PropGtSquared(f64),
    /// 1{∃u: X^u ≤ K}
    ExistsLeq(f64),
    /// 1{∃u: X^u ≥ K}
    ExistsGeq(f64),
}

impl Functional {
    pub fn eval(&self, loads: &[f64]) -> f64 {
        let n = loads.len() as f64;
        let frac = |pred: &dyn Fn(f64) -> bool| {
            if loads.is_empty() {
                0.0
            } else {
                loads.iter().filter(|&&x| pred(x)).count() as f64 / n
            }
        };
        match self {
            Functional::Count => n,
            Functional::CountSquared => n * n,
            Functional::Sum(f) => loads.iter().map(|&x| f.eval(x)).sum(),
            Functional::CountAbove(k) => loads.iter().filter(|&&x| x > *k).count() as f64,
            Functional::PropLeq(k) => frac(&|x| x <= *k),
            Functional::PropGeq(k) => frac(&|x| x >= *k),
            Functional::PropGtSquared(k) => frac(&|x| x > *k).powi(2),
            Functional::ExistsLeq(k) => f64::from(loads.iter().any(|&x| x <= *k)),
            Functional::ExistsGeq(k) => f64::from(loads.iter().any(|&x| x >= *k)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Count => "N".into(),
            Functional::CountSquared => "N^2".into(),
            Functional::Sum(f) => format!("sum[{f}]"),
            Functional::CountAbove(k) => format!("count(X>{k})"),
            Functional::PropLeq(k) => format!("prop(X<={k})"),
            Functional::PropGeq(k) => format!("prop(X>={k})"),
            Functional::PropGtSquared(k) => format!("prop(X>{k})^2"),
            Functional::ExistsLeq(k) => format!("exists(X<={k})"),
            Functional::ExistsGeq(k) => format!("exists(X>={k})"),
        }
    }
}

/// Per-replicate functional values: `values[i][j][r]` for time i, functional j, replicate r.
#[derive(Clone, Debug)]
pub struct McSamples {
    pub times: Vec<f64>,
    pub functionals: Vec<Functional>,
    pub values: Vec<Vec<Vec<f64>>>,
    pub capped_replicates: usize,
}

impl McSamples {
    pub fn estimate(&self, time_index: usize, functional_index: usize) -> Estimate {
        Estimate::from_samples(&self.values[time_index][functional_index])
    }
}

/// Runs `n_reps` independent replicates on stream family `streams` and records
/// every functional at every time. Replicates run in parallel; the result does
/// not depend on scheduling.
pub fn sample_functionals_mc(
    spec: &ModelSpec,
    x0: f64,
    times: &[f64],
    functionals: &[Functional],
    n_reps: usize,
    cfg: &IntegratorConfig,
    caps: &PopulationCaps,
    streams: &StreamSource,
) -> Result<McSamples> {
    if n_reps < 2 {
        return Err(Error::Precondition(format!("need at least 2 replicates, got {n_reps}")));
    }
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let per_rep: Vec<Result<(Vec<Vec<f64>>, bool)>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = streams.stream(rep);
            let mut out = vec![vec![0.0; functionals.len()]; times.len()];
            let mut loads = Vec::new();
            let st = run_population(x0, horizon, spec, cfg, caps, times, &mut rng, |t, st| {
                loads.clear();
                loads.extend(st.loads());
                for (i, &ti) in times.iter().enumerate() {
                    if ti == t {
                        for (j, f) in functionals.iter().enumerate() {
                            out[i][j] = f.eval(&loads);
                        }
                    }
                }
            })?;
            Ok((out, st.is_capped()))
        })
        .collect();
    let mut values = vec![vec![Vec::with_capacity(n_reps); functionals.len()]; times.len()];
    let mut capped = 0;
    for r in per_rep {
        let (out, c) = r?;
        capped += usize::from(c);
        for (i, row) in out.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[i][j].push(v);
            }
        }
    }
    Ok(McSamples { times: times.to_vec(), functionals: functionals.to_vec(), values, capped_replicates: capped })
}

/// Monte Carlo estimate of one functional at one time.
#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: Estimate,
    pub capped_replicates: usize,
    pub master_seed: u64,
}

pub fn estimate_functional_mc(
    spec: &ModelSpec,
    x0: f64,
    t: f64,
    functional: &Functional,
    n_reps: usize,
    cfg: &IntegratorConfig,
    streams: &StreamSource,
) -> Result<McEstimate> {
    let s = sample_functionals_mc(spec, x0, &[t], std::slice::from_ref(functional), n_reps, cfg, &PopulationCaps::default(), streams)?;
    Ok(McEstimate { estimate: s.estimate(0, 0), capped_replicates: s.capped_replicates, master_seed: streams.master_seed })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub k: f64,
    pub prop_leq: Estimate,
    pub prop_geq: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub capped_replicates: usize,
}

impl ScanTable {
    pub fn row(&self, t: f64, k: f64) -> Option<&ScanRow> {
        self.rows.iter().find(|r| r.t == t && r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,K,prop_leq_K,prop_leq_K_se,prop_geq_K,prop_geq_K_se,n\n");
        for r in &self.rows {
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                r.t, r.k, r.prop_leq.mean, r.prop_leq.se, r.prop_geq.mean, r.prop_geq.se, r.prop_leq.n
            );
        }
        s
    }
}

/// E[1_{N_t≥1}·prop_{≤K}] and E[1_{N_t≥1}·prop_{≥K}] over a (t, K) grid.
pub fn proportion_decay_scan(
    spec: &ModelSpec,
    x0: f64,
    k_list: &[f64],
    t_list: &[f64],
    n_reps: usize,
    cfg: &IntegratorConfig,
    caps: &PopulationCaps,
    streams: &StreamSource,
) -> Result<ScanTable> {
    let functionals: Vec<Functional> =
        k_list.iter().flat_map(|&k| [Functional::PropLeq(k), Functional::PropGeq(k)]).collect();
    let s = sample_functionals_mc(spec, x0, t_list, &functionals, n_reps, cfg, caps, streams)?;
    let mut rows = Vec::new();
    for (i, &t) in t_list.iter().enumerate() {
        for (j, &k) in k_list.iter().enumerate() {
            rows.push(ScanRow { t, k, prop_leq: s.estimate(i, 2 * j), prop_geq: s.estimate(i, 2 * j + 1) });
        }
    }
    Ok(ScanTable { rows, capped_replicates: s.capped_replicates })
}

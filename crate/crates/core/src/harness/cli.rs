//! The `parabranch` command line. Exit status: 0 when everything requested passes or holds,
//! 1 when a check or experiment fails, 2 on usage, config or I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use super::experiment::{run_experiment, select_experiments, Overrides};
use super::presets::{find_preset, presets};
use super::report::emit_report;
use crate::analysis::{check_condition, Assumption, ConditionQuery, MomentFormulas};
use crate::auxiliary::{simulate_spine_on, Barriers, SpineVariant};
use crate::dynamics::{time_grid, IntegratorConfig};
use crate::model::{parse_model_config, ModelSpec};
use crate::population::{simulate_population, PopulationCaps};
use crate::rng::replicate_stream;

#[derive(Debug, Parser)]
#[command(name = "parabranch", version, about = "Simulate and verify branching jump-diffusions with parasite loads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model config file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in preset, used when no config file is given.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Initial load of the root cell.
    #[arg(long, global = true)]
    pub x0: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub reps: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    pub dt: Option<f64>,
    /// Jump truncation level.
    #[arg(long, global = true, value_name = "X")]
    pub eps: Option<f64>,
    /// Output directory; stdout when omitted (verify defaults to ./report).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated times.
    #[arg(long = "t", global = true, value_name = "LIST", value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Comma-separated load thresholds.
    #[arg(long = "K", global = true, value_name = "LIST", value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the population and print statistics at each requested time.
    Simulate,
    /// Simulate one auxiliary process path per replicate.
    Spine {
        /// uniform, weighted:ALPHA, inhomogeneous, tilde, bar or hat.
        #[arg(long, default_value = "uniform")]
        variant: String,
    },
    /// Check assumptions on the model; prints JSON reports.
    Check {
        /// Assumption names (EXPL, LDCG, ...); all when omitted.
        #[arg(long = "assumption", value_delimiter = ',')]
        assumptions: Vec<String>,
        /// Fixes γ for LGBE and its consequences.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Closed-form moments of N_t under LDCG.
    Moments,
    /// Run a registered experiment, or every one with `all`.
    Verify { experiment: String },
    /// Built-in presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
    /// Print a preset as a config file.
    Show { name: String },
}

const DEFAULT_SEED: u64 = 1;

impl Common {
    fn model(&self) -> anyhow::Result<(ModelSpec, f64)> {
        let (spec, x0) = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => bail!("give either --config or --preset, not both"),
            (Some(path), None) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let spec = parse_model_config(&text).with_context(|| format!("in {}", path.display()))?;
                (spec, 1.0)
            }
            (None, name) => {
                let p = find_preset(name.as_deref().unwrap_or("ldcg"))?;
                (p.spec, p.x0)
            }
        };
        Ok((spec, self.x0.unwrap_or(x0)))
    }

    fn integrator(&self) -> anyhow::Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default().with_seed(self.seed.unwrap_or(DEFAULT_SEED));
        if let Some(dt) = self.dt {
            cfg = cfg.with_dt(dt);
        }
        if let Some(e) = self.eps {
            cfg = cfg.with_eps(e);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn times(&self) -> Vec<f64> {
        self.t.clone().unwrap_or_else(|| vec![1.0])
    }

    fn emit(&self, file: &str, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(file);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn parse_variant(s: &str, horizon: f64) -> anyhow::Result<SpineVariant> {
    Ok(match s {
        "uniform" => SpineVariant::Uniform,
        "inhomogeneous" => SpineVariant::Inhomogeneous { horizon },
        "tilde" => SpineVariant::Tilde { horizon },
        "bar" => SpineVariant::Bar { horizon },
        "hat" => SpineVariant::Hat { horizon },
        _ => match s.strip_prefix("weighted:") {
            Some(a) => SpineVariant::Weighted { alpha: a.parse().with_context(|| format!("bad weight exponent `{a}`"))? },
            None => bail!("unknown spine variant `{s}`"),
        },
    })
}

fn simulate(c: &Common) -> anyhow::Result<bool> {
    let (spec, x0) = c.model()?;
    let cfg = c.integrator()?;
    let times = c.times();
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let ks = c.k.clone().unwrap_or_default();
    let mut out = String::from("rep,t,n,total_load,K,prop_leq_K,prop_geq_K,prop_gt_K,capped\n");
    for rep in 0..c.reps.unwrap_or(1) as u64 {
        let mut rng = replicate_stream(cfg.seed, "simulate", rep);
        let run = simulate_population(x0, horizon, &spec, &cfg, &PopulationCaps::default(), &times, &ks, &mut rng)?;
        for s in &run.samples {
            if ks.is_empty() {
                writeln!(out, "{rep},{},{},{},,,,,{}", s.time, s.n, s.total_parasites, s.capped)?;
            }
            for (i, k) in ks.iter().enumerate() {
                writeln!(
                    out,
                    "{rep},{},{},{},{k},{},{},{},{}",
                    s.time, s.n, s.total_parasites, s.prop_leq_k[i], s.prop_geq_k[i], s.prop_gt_k[i], s.capped
                )?;
            }
        }
    }
    c.emit("simulate.csv", &out)?;
    Ok(true)
}

fn spine(c: &Common, variant: &str) -> anyhow::Result<bool> {
    let (spec, x0) = c.model()?;
    let cfg = c.integrator()?;
    let times = c.times();
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let variant = parse_variant(variant, horizon)?;
    let grid = time_grid(0.0, horizon, cfg.dt, &times);
    let mut out = String::from("rep,variant,time,value\n");
    for rep in 0..c.reps.unwrap_or(1) as u64 {
        let mut rng = replicate_stream(cfg.seed, "spine", rep);
        let path = simulate_spine_on(variant, x0, &grid, &spec, &cfg, Barriers::default(), &mut rng)?;
        for line in path.to_csv().lines().skip(1) {
            writeln!(out, "{rep},{line}")?;
        }
    }
    c.emit("spine.csv", &out)?;
    Ok(true)
}

fn check(c: &Common, names: &[String], gamma: Option<f64>) -> anyhow::Result<bool> {
    let (spec, _) = c.model()?;
    let wanted: Vec<Assumption> = if names.is_empty() {
        Assumption::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse::<Assumption>()).collect::<crate::Result<_>>()?
    };
    let reports: Vec<_> = wanted
        .iter()
        .map(|&a| {
            let mut q = ConditionQuery::new(a);
            if let Some(g) = gamma {
                q = q.with_gamma(g);
            }
            check_condition(&q, &spec)
        })
        .collect();
    let ok = reports.iter().all(|r| r.is_holding());
    c.emit("check.json", &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    Ok(ok)
}

fn moments(c: &Common) -> anyhow::Result<bool> {
    let (spec, x0) = c.model()?;
    let mf = MomentFormulas::from_spec(&spec)?;
    let mut out = String::from("t,mean_N,second_moment_N,mean_total_load\n");
    for t in c.times() {
        writeln!(out, "{t},{},{},{}", mf.mean(x0, 0.0, t), mf.second_moment(x0, t), mf.mean_total_load(x0, t))?;
    }
    if let Ok(r) = mf.asymptotic_ratio(x0) {
        eprintln!("limit of E[N_t^2]/E[N_t]^2: {r}");
    }
    c.emit("moments.csv", &out)?;
    Ok(true)
}

fn verify(c: &Common, id: &str) -> anyhow::Result<bool> {
    if c.config.is_some() || c.preset.is_some() || c.x0.is_some() {
        bail!("verify runs registered experiments; --config, --preset and --x0 do not apply");
    }
    let overrides = Overrides { seed: c.seed, reps: c.reps, dt: c.dt, eps: c.eps, t_grid: c.t.clone(), k_list: c.k.clone() };
    let mut results = Vec::new();
    let mut all_ok = true;
    for spec in select_experiments(id)? {
        let spec = spec.with_overrides(&overrides);
        match run_experiment(&spec) {
            Ok(r) => {
                println!("{} {} ({:.1}s)", if r.pass { "PASS" } else { "FAIL" }, r.id, r.wall_clock_seconds);
                for cell in r.failed_cells() {
                    println!(
                        "    {} t={:?} K={:?}: {} vs {} (tol {})",
                        cell.label, cell.t, cell.k, cell.estimate.mean, cell.reference, cell.tolerance
                    );
                }
                all_ok &= r.pass;
                results.push(r);
            }
            Err(e) => {
                println!("FAIL {}: {e}", spec.id);
                all_ok = false;
            }
        }
    }
    let dir = c.out.clone().unwrap_or_else(|| Path::new("report").to_path_buf());
    let files = emit_report(&results, &dir)?;
    eprintln!("wrote {} and {} ({} plots)", files.csv.display(), files.json.display(), files.plots.len());
    Ok(all_ok)
}

fn presets_cmd(c: &Common, action: &PresetAction) -> anyhow::Result<bool> {
    match action {
        PresetAction::List => {
            for p in presets() {
                println!("{:<20} {}", p.name, p.summary);
            }
        }
        PresetAction::Show { name } => c.emit(&format!("{name}.toml"), &find_preset(name)?.config_text())?,
    }
    Ok(true)
}

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Simulate => simulate(c),
        Command::Spine { variant } => spine(c, variant),
        Command::Check { assumptions, gamma } => check(c, assumptions, *gamma),
        Command::Moments => moments(c),
        Command::Verify { experiment } => verify(c, experiment),
        Command::Presets { action } => presets_cmd(c, action),
    }
}

/// Parses the process arguments and runs; the entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

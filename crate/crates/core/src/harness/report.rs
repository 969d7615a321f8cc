//! `results.csv`, `report.json` and `plots/*.svg`.
//!
//! results.csv has one row per result cell:
//!
//! | column | meaning |
//! |---|---|
//! | experiment, kind, preset | which run produced the cell |
//! | label | the quantity compared, e.g. `E[N_t]` |
//! | t, K | time and threshold; empty when not applicable |
//! | estimate, se, n | Monte Carlo mean, standard error, replicate count |
//! | reference, reference_se | closed form (se 0) or independent estimate |
//! | tolerance, comparison | pass rule: `within` is \|est−ref\| ≤ tol, `at-most` est ≤ ref+tol, `at-least` est ≥ ref−tol |
//! | capped, pass | cap flag and verdict |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{ExperimentResult, Series};
use crate::rng::STREAM_RULE;
use crate::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "experiment,kind,preset,label,t,K,estimate,se,n,reference,reference_se,tolerance,comparison,capped,pass";

#[derive(Clone, Debug)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plots: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema_version: u32,
    /// Shared by every experiment in the report; null when they differ.
    master_seed: Option<u64>,
    stream_rule: &'static str,
    pass: bool,
    experiments: &'a [ExperimentResult],
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn results_csv(results: &[ExperimentResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in results {
        for c in &r.cells {
            let comparison = serde_json::to_value(c.comparison).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.id),
                r.kind,
                csv_field(&r.preset),
                csv_field(&c.label),
                opt(c.t),
                opt(c.k),
                c.estimate.mean,
                c.estimate.se,
                c.estimate.n,
                c.reference,
                c.reference_se,
                c.tolerance,
                comparison,
                c.capped,
                c.pass
            );
        }
    }
    s
}

pub fn report_json(results: &[ExperimentResult]) -> Result<String> {
    let seed = results.first().map(|r| r.spec.master_seed);
    let shared = seed.filter(|s| results.iter().all(|r| r.spec.master_seed == *s));
    let doc = ReportJson {
        schema_version: REPORT_SCHEMA_VERSION,
        master_seed: shared,
        stream_rule: STREAM_RULE,
        pass: results.iter().all(|r| r.pass),
        experiments: results,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static line chart of each series with a ±1 SE band. Fails unless every series has
/// strictly increasing finite times and finite values.
pub fn svg_chart(title: &str, series: &[&Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::Invariant(format!("chart `{title}` has no points")));
    }
    for s in series {
        if s.points.windows(2).any(|w| !(w[1].0 > w[0].0)) || s.points.iter().any(|p| !p.0.is_finite()) {
            return Err(Error::Invariant(format!("chart `{title}`: time axis of `{}` is not strictly increasing", s.name)));
        }
        if s.points.iter().any(|p| !(p.1.is_finite() && p.2.is_finite())) {
            return Err(Error::Invariant(format!("chart `{title}`: `{}` has a non-finite value", s.name)));
        }
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut t0, mut t1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(t, m, se) in all {
        t0 = t0.min(t);
        t1 = t1.max(t);
        y0 = y0.min(m - se);
        y1 = y1.max(m + se);
    }
    if t1 == t0 {
        t1 = t0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (bx, by) = (MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" stroke="black"/>"#, W - MARGIN);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN}" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (t, y) = (t0 + f * (t1 - t0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t:.3}</text>"#, px(t), by + 18.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.3}</text>"#, bx - 6.0, py(y) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, W / 2.0, H - 12.0);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let upper: Vec<String> = ser.points.iter().map(|&(t, m, se)| format!("{:.2},{:.2}", px(t), py(m + se))).collect();
        let lower: Vec<String> = ser.points.iter().rev().map(|&(t, m, se)| format!("{:.2},{:.2}", px(t), py(m - se))).collect();
        let _ = writeln!(s, r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, upper.join(" "), lower.join(" "));
        let line: Vec<String> = ser.points.iter().map(|&(t, m, _)| format!("{:.2},{:.2}", px(t), py(m))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for &(t, m, _) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(t), py(m));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - MARGIN - 150.0, MARGIN + 16.0 * i as f64, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Writes results.csv, report.json and one chart per (experiment, K) into `dir`.
pub fn emit_report(results: &[ExperimentResult], dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("results.csv");
    fs::write(&csv, results_csv(results))?;
    let json = dir.join("report.json");
    fs::write(&json, report_json(results)?)?;

    let mut plots = Vec::new();
    for r in results.iter().filter(|r| !r.series.is_empty()) {
        let plot_dir = dir.join("plots");
        fs::create_dir_all(&plot_dir)?;
        let mut keys: Vec<Option<f64>> = Vec::new();
        for s in &r.series {
            if !keys.contains(&s.k) {
                keys.push(s.k);
            }
        }
        for k in keys {
            let group: Vec<&Series> = r.series.iter().filter(|s| s.k == k).collect();
            let (title, name) = match k {
                Some(k) => (format!("{}: K = {k}", r.id), format!("{}-K{}.svg", r.id, k)),
                None => (r.id.clone(), format!("{}.svg", r.id)),
            };
            let path = plot_dir.join(file_stem(&name));
            fs::write(&path, svg_chart(&title, &group)?)?;
            plots.push(path);
        }
    }
    Ok(ReportFiles { csv, json, plots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_result_set_gives_header_only() {
        assert_eq!(results_csv(&[]), format!("{CSV_HEADER}\n"));
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(files.csv).unwrap(), format!("{CSV_HEADER}\n"));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(files.json).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!(files.plots.is_empty());
    }

    #[test]
    fn chart_rejects_a_non_monotone_axis() {
        let bad = Series { name: "p".into(), k: None, points: vec![(1.0, 0.5, 0.1), (0.5, 0.4, 0.1)] };
        assert!(svg_chart("x", &[&bad]).is_err());
        let good = Series { name: "p".into(), k: None, points: vec![(0.5, 0.4, 0.1), (1.0, 0.5, 0.1)] };
        let svg = svg_chart("x", &[&good]).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}

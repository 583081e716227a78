//! `summary.csv`, per-sweep SVG plots and `manifest.json` from a results directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::SweepAxis;
use super::run::{csv_row, load_runs, write_file, RunReport, SUMMARY_HEADER};
use super::sweep::FitSummary;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub id: String,
    pub config_hash: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub generated_unix: u64,
    pub config_hashes: Vec<String>,
    pub runs: Vec<ManifestRun>,
    pub plots: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Rows sorted by `(scenario, μ, h, grid)`.
pub fn summary_csv(runs: &[RunReport], with_timings: bool) -> String {
    let mut sorted: Vec<&RunReport> = runs.iter().collect();
    sorted.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.mu.total_cmp(&b.mu))
            .then(a.h.total_cmp(&b.h))
            .then(a.grid.cmp(&b.grid))
    });
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in sorted {
        s += &csv_row(r, with_timings);
        s.push('\n');
    }
    s
}

fn load_fits(out: &Path) -> Result<Vec<FitSummary>> {
    let dir = out.join("fits");
    let mut paths: Vec<PathBuf> = match fs::read_dir(&dir) {
        Ok(it) => it.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect(),
        Err(_) => Vec::new(),
    };
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect()
}

/// Log–log plot of `|remainder|` with and without the saddle corrections
/// against the swept coordinate (`|w|` for the sigma axis).
pub fn sweep_svg(fit: &FitSummary) -> String {
    let (w, hgt, pad) = (640.0, 420.0, 60.0);
    let xs: Vec<f64> = fit.points.iter().map(|p| p.coordinate.abs().max(1e-300).log10()).collect();
    let series = |f: &dyn Fn(&RunReport) -> f64| -> Vec<f64> {
        fit.points.iter().map(|p| f(&p.report).abs().max(1e-300).log10()).collect()
    };
    let with = series(&|r| r.remainder);
    let without = series(&|r| r.n_exact - r.n_pred_without_corrections());
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&[with.clone(), without.clone()].concat());
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| hgt - pad - (y - y0) / (y1 - y0) * (hgt - 2.0 * pad);
    let poly = |ys: &[f64], color: &str| {
        let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let dots: String = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", px(*x), py(*y)))
            .collect();
        format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>{dots}\n", pts.join(" "))
    };
    let axis = match fit.axis {
        SweepAxis::H => "log10 h",
        SweepAxis::Mu => "log10 mu",
        SweepAxis::Sigma => "log10 |w|",
    };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{hgt}\" viewBox=\"0 0 {w} {hgt}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.0}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(&fit.name)
    );
    s += &format!(
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/><line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{0}\" stroke=\"black\"/>\n",
        hgt - pad,
        w - pad
    );
    for (v, anchor, x, y) in [
        (x0, "start", px(x0), hgt - pad + 16.0),
        (x1, "end", px(x1), hgt - pad + 16.0),
    ] {
        s += &format!("<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{v:.3}</text>\n");
    }
    for v in [y0, y1] {
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{v:.3}</text>\n",
            pad - 6.0,
            py(v) + 4.0
        );
    }
    s += &format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{axis}</text>\n\
         <text x=\"16\" y=\"{:.0}\" transform=\"rotate(-90 16 {:.0})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 |remainder|</text>\n",
        w / 2.0,
        hgt - 16.0,
        hgt / 2.0,
        hgt / 2.0
    );
    s += &poly(&with, "#1f77b4");
    s += &poly(&without, "#d62728");
    s += &format!(
        "<text x=\"{0:.0}\" y=\"44\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1f77b4\">with corrections</text>\n\
         <text x=\"{0:.0}\" y=\"58\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">without corrections</text>\n</svg>\n",
        w - pad - 120.0
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `summary.csv`, `plots/<sweep>.svg` for every sweep with at least
/// two points, and `manifest.json`.
pub fn emit_report(out: &Path, with_timings: bool) -> Result<ReportFiles> {
    let runs = load_runs(out)?;
    if runs.is_empty() {
        return Err(Error::Validation(format!("no runs found under {}", out.join("runs").display())));
    }
    let summary = out.join("summary.csv");
    write_file(&summary, &summary_csv(&runs, with_timings))?;
    let mut plots = Vec::new();
    for fit in load_fits(out)?.iter().filter(|f| f.points.len() >= 2) {
        let path = out.join("plots").join(format!("{}.svg", fit.name));
        write_file(&path, &sweep_svg(fit))?;
        plots.push(path);
    }
    let hashes: BTreeSet<String> = runs.iter().map(|r| r.config_hash.clone()).collect();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config_hashes: hashes.into_iter().collect(),
        runs: runs
            .iter()
            .map(|r| ManifestRun { id: r.id(), config_hash: r.config_hash.clone(), seconds: r.seconds })
            .collect(),
        plots: plots.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
    };
    let mpath = out.join("manifest.json");
    write_file(&mpath, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(ReportFiles { summary, plots, manifest: mpath })
}

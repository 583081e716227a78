//! Single `(scenario, μ, h)` comparison of the oracle count with the
//! asymptotic prediction, and its on-disk records.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::scenario::Scenario;
use crate::asymptote::{predict, Prediction, Regime, SaddleCorrection};
use crate::critpoints::{find_critical_points, CriticalPoint};
use crate::error::{Error, Result};
use crate::oracle::{assemble_with, eigensolve, oracle_grid, spectral_count, GuardMargins};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides `[grid].interior`.
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mu: f64,
    pub h: f64,
    pub regime: Regime,
    pub n_exact: f64,
    pub n_weyl: f64,
    pub corrections: Vec<SaddleCorrection>,
    pub corr_sum: f64,
    pub corr2_sum: f64,
    pub superstrong_term: f64,
    pub n_pred: f64,
    pub remainder: f64,
    /// Interior oracle nodes per axis.
    pub grid: usize,
    pub guards: GuardMargins,
    pub critical_points: Vec<CriticalPoint>,
    pub config_hash: String,
    pub seconds: f64,
}

impl RunReport {
    /// `N_pred` with the saddle corrections left out.
    pub fn n_pred_without_corrections(&self) -> f64 {
        self.n_pred - self.corr_sum - self.corr2_sum
    }

    /// Stable identifier used for file names.
    pub fn id(&self) -> String {
        let clean: String = self
            .scenario
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        format!("{clean}_mu{:.6}_h{:.6}_n{}", self.mu, self.h, self.grid)
    }

    /// Copy with the wall time cleared, for comparisons across executions.
    pub fn without_timing(&self) -> RunReport {
        RunReport { seconds: 0.0, ..self.clone() }
    }
}

/// Oracle count `∫e(x,x,τ)ψ dx` for the scenario at `(μ, h)` on `interior²` nodes.
pub fn oracle_count(cfg: &Config, mu: f64, h: f64, interior: usize, seed: u64) -> Result<(f64, GuardMargins)> {
    let l = cfg.scenario.half_width;
    let grid = oracle_grid(interior, -l, l)?;
    let sc = Scenario::build(&cfg.scenario, grid, mu, h, seed)?;
    let op = assemble_with(&sc.coeffs, grid, mu, h, &cfg.grid.oracle_options())?;
    let sd = eigensolve(&op)?;
    Ok((spectral_count(&sd, &sc.psi, cfg.regime.tau), op.guards))
}

/// Fields, critical points and the asymptotic prediction for the configured `(μ, h)`.
pub fn prediction(cfg: &Config, opts: &RunOptions) -> Result<(Scenario, Vec<CriticalPoint>, Prediction)> {
    let rp = cfg.regime_params()?;
    let l = cfg.scenario.half_width;
    let grid = oracle_grid(opts.grid.unwrap_or(cfg.grid.interior), -l, l)?;
    let sc = Scenario::build(&cfg.scenario, grid, rp.mu, rp.h, opts.seed)?;
    let radius = cfg.scenario.search_radius.min(0.95 * l);
    let points = find_critical_points(&sc.coeffs, radius)?.points;
    let pred = predict(&sc.coeffs, &sc.psi, &rp, &points)?;
    Ok((sc, points, pred))
}

pub fn run_scenario(cfg: &Config, opts: &RunOptions) -> Result<RunReport> {
    faer::set_global_parallelism(faer::Par::Seq);
    let start = Instant::now();
    let (sc, critical_points, pred) = prediction(cfg, opts)?;
    let rp = cfg.regime_params()?;
    let interior = opts.grid.unwrap_or(cfg.grid.interior);
    let grid = sc.psi.grid;
    let op = assemble_with(&sc.coeffs, grid, rp.mu, rp.h, &cfg.grid.oracle_options())?;
    let sd = eigensolve(&op)?;
    let n_exact = spectral_count(&sd, &sc.psi, rp.tau);
    let remainder = n_exact - pred.total;
    if !remainder.is_finite() {
        return Err(Error::Numerical("non-finite remainder".into()));
    }
    Ok(RunReport {
        scenario: cfg.scenario.name.clone(),
        mu: rp.mu,
        h: rp.h,
        regime: pred.regime,
        n_exact,
        n_weyl: pred.weyl_integral,
        corr_sum: pred.corr_sum(),
        corr2_sum: pred.corr2_sum(),
        corrections: pred.saddle_corrections.clone(),
        superstrong_term: pred.superstrong_term,
        n_pred: pred.total,
        remainder,
        grid: interior,
        guards: op.guards,
        critical_points,
        config_hash: cfg.hash()?,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub const SUMMARY_HEADER: &str = "scenario,mu,h,regime,N_exact,N_weyl,corr_sum,corr2_sum,N_pred,remainder,grid,seconds";

/// One CSV row in `SUMMARY_HEADER` order; the seconds field is left empty
/// unless `with_timings` is set, so that re-runs are byte-identical.
pub fn csv_row(r: &RunReport, with_timings: bool) -> String {
    let secs = if with_timings { format!("{:.3}", r.seconds) } else { String::new() };
    // adding 0.0 turns −0 into 0
    let z = |x: f64| x + 0.0;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.scenario,
        r.mu,
        r.h,
        r.regime,
        z(r.n_exact),
        z(r.n_weyl),
        z(r.corr_sum),
        z(r.corr2_sum),
        z(r.n_pred),
        z(r.remainder),
        r.grid,
        secs
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn run_path(out: &Path, r: &RunReport) -> PathBuf {
    out.join("runs").join(format!("{}.json", r.id()))
}

/// Writes `runs/<id>.json` and upserts the row into `sweeps/<sweep>.csv`
/// (rows keyed by run id, sorted by `(μ, h, grid)`).
pub fn persist_run(out: &Path, r: &RunReport, sweep: &str, with_timings: bool) -> Result<()> {
    write(&run_path(out, r), &serde_json::to_string_pretty(r)?)?;
    let path = out.join("sweeps").join(format!("{sweep}.csv"));
    let mut rows: Vec<(String, String)> = Vec::new();
    if path.exists() {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
            let (id, row) = line.split_once(',').unwrap_or((line, ""));
            rows.push((id.to_string(), row.to_string()));
        }
    }
    rows.retain(|(id, _)| *id != r.id());
    rows.push((r.id(), csv_row(r, with_timings)));
    rows.sort_by(|a, b| sort_key(&a.1).partial_cmp(&sort_key(&b.1)).unwrap().then_with(|| a.0.cmp(&b.0)));
    let mut text = format!("id,{SUMMARY_HEADER}\n");
    for (id, row) in rows {
        text += &format!("{id},{row}\n");
    }
    write(&path, &text)
}

fn sort_key(row: &str) -> (f64, f64, f64) {
    let f: Vec<f64> = row.split(',').map(|s| s.parse().unwrap_or(0.0)).collect();
    let g = |i: usize| f.get(i).copied().unwrap_or(0.0);
    (g(1), g(2), g(10))
}

pub fn load_runs(out: &Path) -> Result<Vec<RunReport>> {
    let dir = out.join("runs");
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

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}

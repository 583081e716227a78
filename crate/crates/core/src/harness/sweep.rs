//! Parameter sweeps, remainder scaling fits and the corrections-on/off comparison.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{Config, SweepAxis, SweepConfig};
use super::run::{oracle_count, persist_run, prediction, run_scenario, write_file, RunOptions, RunReport};
use crate::asymptote::sigma_gap;
use crate::error::{Error, Result};
use crate::regress::{least_squares, line_fit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Swept value: `h`, `μ`, or the signed saddle offset `w`.
    pub coordinate: f64,
    pub report: RunReport,
    /// `N_exact` on the coarse check grid.
    pub coarse_n_exact: Option<f64>,
    pub discretization_limited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Corrections-on versus corrections-off regression at a saddle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    /// `Σ (N_exact − N_pred − c)²` with the best constant `c`, corrections included.
    pub residual_with: f64,
    pub residual_without: f64,
    /// `with-corrections`, `without-corrections` or `tie`.
    pub verdict: String,
    /// Least-squares `β` in `N_exact − N_pred,off ≈ c + β·corr`.
    pub fitted_amplitude: f64,
    /// Slope of `N_exact − N_pred,off` against `log((σ + μ⁻²)(1 + μ⁻¹h⁻¹))`.
    pub drift_slope: f64,
    /// Sign of the change of that discrepancy as `σ → 0`.
    pub drift_sign: i32,
    pub varkappa: f64,
}

impl ModelComparison {
    pub fn corrections_help(&self) -> bool {
        self.residual_with < self.residual_without
    }

    pub fn drift_matches_varkappa(&self) -> bool {
        self.drift_sign != 0 && self.drift_sign as f64 == self.varkappa.signum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    /// Slope of `log|remainder|` against `log h⁻¹` (h-axis only).
    pub exponent_inv_h: Option<f64>,
    /// Slope of `log|remainder|` against `log(μ⁻¹h⁻¹)`.
    pub exponent_law: f64,
    /// RMS residual of the `exponent_law` fit in `log|remainder|`.
    pub fit_rms: f64,
    /// Same slopes over points not flagged as discretization limited.
    pub exponent_inv_h_resolved: Option<f64>,
    pub discretization_limited: bool,
    pub model_comparison: Option<ModelComparison>,
}

impl FitSummary {
    pub fn flags(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.discretization_limited).map(|p| p.coordinate).collect()
    }
}

/// Configuration of one sweep point.
pub fn point_config(cfg: &Config, sweep: &SweepConfig, value: f64, saddle_vf: Option<(f64, u64)>) -> Result<Config> {
    let mut c = cfg.clone();
    c.sweep = None;
    match sweep.axis {
        SweepAxis::H => {
            c.regime.h = value;
            if let Some(e) = sweep.mu_exponent {
                c.regime.mu = sweep.mu_scale * value.powf(e);
            }
        }
        SweepAxis::Mu => c.regime.mu = value,
        SweepAxis::Sigma => {
            let (vf, nbar) = saddle_vf.ok_or_else(|| Error::Validation("sigma sweep needs a saddle".into()))?;
            c.regime.mu = (vf + value) / ((2 * nbar + 1) as f64 * cfg.regime.h);
        }
    }
    c.validate()?;
    Ok(c)
}

/// Value of `V/F` at the reliable saddle nearest the centre of ψ and the
/// Landau index used for the sigma axis.
fn saddle_level(cfg: &Config, sweep: &SweepConfig, opts: &RunOptions) -> Result<(f64, u64)> {
    let (_, points, _) = prediction(cfg, opts)?;
    let center = cfg.scenario.psi.center;
    let s = points
        .iter()
        .filter(|p| p.is_saddle() && !p.boundary_unreliable)
        .min_by(|a, b| {
            let da = (a.location[0] - center[0]).hypot(a.location[1] - center[1]);
            let db = (b.location[0] - center[0]).hypot(b.location[1] - center[1]);
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::Validation("sigma sweep needs a reliable saddle of V/F".into()))?;
    let nbar = match sweep.nbar {
        Some(n) => n,
        None => sigma_gap(s.v_value, s.f_value, cfg.regime.mu, cfg.regime.h).nbar,
    };
    Ok((s.vf_value, nbar))
}

fn run_point(cfg: &Config, sweep: &SweepConfig, value: f64, level: Option<(f64, u64)>, opts: &RunOptions) -> Result<SweepPoint> {
    let pc = point_config(cfg, sweep, value, level)?;
    let report = run_scenario(&pc, opts)?;
    let (mut coarse, mut limited, mut note) = (None, false, None);
    if let Some(n) = sweep.coarse_interior {
        match oracle_count(&pc, report.mu, report.h, n, opts.seed) {
            Ok((c, _)) => {
                limited = (c - report.n_exact).abs() > 0.25 * report.remainder.abs();
                coarse = Some(c);
            }
            Err(e) => {
                limited = true;
                note = Some(format!("coarse check failed: {e}"));
            }
        }
    }
    Ok(SweepPoint { coordinate: value, report, coarse_n_exact: coarse, discretization_limited: limited, note })
}

fn slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (s, c) = line_fit(x, y)?;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - s * a - c).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    Ok((s, rms))
}

fn centred_ss(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum()
}

fn compare_models(points: &[SweepPoint]) -> Result<Option<ModelComparison>> {
    let dominant = |r: &RunReport| {
        r.corrections
            .iter()
            .max_by(|a, b| a.corr_value.abs().total_cmp(&b.corr_value.abs()))
            .cloned()
    };
    if points.iter().all(|p| p.report.corr_sum == 0.0) {
        return Ok(None);
    }
    let mut d = Vec::new();
    let mut c = Vec::new();
    let mut logs = Vec::new();
    let mut varkappa = 0.0;
    for p in points {
        let r = &p.report;
        let Some(s) = dominant(r) else { continue };
        varkappa = s.term.varkappa;
        d.push(r.n_exact - r.n_pred_without_corrections());
        c.push(r.corr_sum);
        logs.push(((s.term.sigma + r.mu.powi(-2)) * (1.0 + 1.0 / (r.mu * r.h))).ln());
    }
    if d.len() < 3 {
        return Ok(None);
    }
    let with: Vec<f64> = d.iter().zip(&c).map(|(a, b)| a - b).collect();
    let (residual_with, residual_without) = (centred_ss(&with), centred_ss(&d));
    let verdict = if residual_with < residual_without {
        "with-corrections"
    } else if residual_with > residual_without {
        "without-corrections"
    } else {
        "tie"
    };
    let rows: Vec<Vec<f64>> = c.iter().map(|&ci| vec![1.0, ci]).collect();
    let fitted_amplitude = least_squares(&rows, &d, None)?.coef[1];
    let (drift_slope, _) = line_fit(&logs, &d)?;
    Ok(Some(ModelComparison {
        residual_with,
        residual_without,
        verdict: verdict.to_string(),
        fitted_amplitude,
        drift_slope,
        // log factor decreases as σ → 0
        drift_sign: -(drift_slope.signum() as i32) * (drift_slope != 0.0) as i32,
        varkappa,
    }))
}

/// Runs every point of `[sweep]` (up to `workers` concurrently), persists
/// the runs and `fits/<name>.json` under `out`, and fits the remainder.
pub fn sweep_and_fit(cfg: &Config, opts: &RunOptions, workers: usize, out: Option<&Path>, with_timings: bool) -> Result<FitSummary> {
    let sweep = cfg.sweep.clone().ok_or_else(|| Error::Validation("config has no [sweep] section".into()))?;
    if sweep.points.len() < 4 {
        return Err(Error::Validation(format!("sweep needs at least 4 points, got {}", sweep.points.len())));
    }
    let mut values = sweep.points.clone();
    values.sort_by(f64::total_cmp);
    let level = match sweep.axis {
        SweepAxis::Sigma => Some(saddle_level(cfg, &sweep, opts)?),
        _ => None,
    };
    let results: Mutex<Vec<Option<Result<SweepPoint>>>> = Mutex::new((0..values.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, values.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= values.len() {
                    break;
                }
                let r = run_point(cfg, &sweep, values[i], level, opts);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let points = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every sweep point ran"))
        .collect::<Result<Vec<SweepPoint>>>()?;
    let name = sweep.name.clone().unwrap_or_else(|| format!("{}-{}", cfg.scenario.name, sweep.axis.name()));
    let summary = summarize(&name, sweep.axis, points)?;
    if let Some(out) = out {
        for p in &summary.points {
            persist_run(out, &p.report, &name, with_timings)?;
        }
        let mut stored = summary.clone();
        if !with_timings {
            for p in &mut stored.points {
                p.report.seconds = 0.0;
            }
        }
        write_file(&out.join("fits").join(format!("{name}.json")), &serde_json::to_string_pretty(&stored)?)?;
    }
    Ok(summary)
}

pub fn summarize(name: &str, axis: SweepAxis, points: Vec<SweepPoint>) -> Result<FitSummary> {
    let log_rem: Vec<f64> = points.iter().map(|p| p.report.remainder.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let law: Vec<f64> = points.iter().map(|p| -(p.report.mu * p.report.h).ln()).collect();
    let (exponent_law, fit_rms) = slope(&law, &log_rem)?;
    let inv_h = |sel: &dyn Fn(&SweepPoint) -> bool| -> Result<Option<f64>> {
        let (x, y): (Vec<f64>, Vec<f64>) = points
            .iter()
            .zip(&log_rem)
            .filter(|(p, _)| sel(p))
            .map(|(p, l)| (-p.report.h.ln(), *l))
            .unzip();
        if axis != SweepAxis::H || x.len() < 2 {
            return Ok(None);
        }
        Ok(Some(slope(&x, &y)?.0))
    };
    let exponent_inv_h = inv_h(&|_| true)?;
    let exponent_inv_h_resolved = inv_h(&|p| !p.discretization_limited)?;
    let model_comparison = compare_models(&points)?;
    Ok(FitSummary {
        name: name.to_string(),
        axis,
        discretization_limited: points.iter().any(|p| p.discretization_limited),
        exponent_inv_h,
        exponent_law,
        fit_rms,
        exponent_inv_h_resolved,
        model_comparison,
        points,
    })
}

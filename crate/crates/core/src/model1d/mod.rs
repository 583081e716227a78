//! One-dimensional effective symbols at a fixed Landau level, their Weyl
//! quantization, phase-space counting, and the saddle model `xξ + k⁻¹(w + μ⁻²ω₁)`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::dense_eigenvalues;
use crate::quadrature::{adaptive_gk, find_roots};
use crate::regress::least_squares;

pub type PhaseFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn phase_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> PhaseFn {
    Arc::new(f)
}

/// Real symbol `a(x, ξ)` of an `ħ`-pseudodifferential operator on a box.
#[derive(Clone)]
pub struct Symbol1D {
    pub a: PhaseFn,
    pub hbar: f64,
    pub lx: f64,
    pub lxi: f64,
    /// Counting zone `|x| + |ξ| ≤ ρ`.
    pub rho: f64,
    /// When set, quantization requires `a − level` to keep one sign on the box edge.
    pub edge_level: Option<f64>,
}

impl fmt::Debug for Symbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol1D")
            .field("hbar", &self.hbar)
            .field("lx", &self.lx)
            .field("lxi", &self.lxi)
            .field("rho", &self.rho)
            .field("edge_level", &self.edge_level)
            .finish_non_exhaustive()
    }
}

impl Symbol1D {
    pub fn new(a: PhaseFn, hbar: f64, lx: f64, lxi: f64, rho: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::Validation(format!("hbar must be positive, got {hbar}")));
        }
        if !(lx > 0.0 && lxi > 0.0) {
            return Err(Error::Validation(format!("box half-widths must be positive, got {lx}, {lxi}")));
        }
        if !(rho > 0.0 && rho <= lx.min(lxi)) {
            return Err(Error::Validation(format!("rho = {rho} must lie in (0, min(Lx, Lxi)]")));
        }
        Ok(Symbol1D { a, hbar, lx, lxi, rho, edge_level: None })
    }

    pub fn with_edge_level(mut self, level: f64) -> Self {
        self.edge_level = Some(level);
        self
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        (self.a)(x, xi)
    }
}

/// `V/F`, `F` and `ω₁` along a canonical section, as functions of `(x, ξ)`.
#[derive(Clone, Default)]
pub struct SectionProfile {
    pub vf: Option<PhaseFn>,
    pub f: Option<PhaseFn>,
    /// Zero when absent.
    pub omega1: Option<PhaseFn>,
    pub lx: f64,
    pub lxi: f64,
    pub rho: f64,
}

impl SectionProfile {
    pub fn constant(vf: f64, f: f64, omega1: f64, half_width: f64) -> Self {
        SectionProfile {
            vf: Some(phase_fn(move |_, _| vf)),
            f: Some(phase_fn(move |_, _| f)),
            omega1: Some(phase_fn(move |_, _| omega1)),
            lx: half_width,
            lxi: half_width,
            rho: half_width,
        }
    }
}

/// `a_n = F(−V/F + (2n+1)μh + μ⁻²ω₁)` with `ħ = h/μ`.
pub fn landau_symbol(profile: &SectionProfile, n: u64, mu: f64, h: f64) -> Result<Symbol1D> {
    let missing = |what: &str| Error::Validation(format!("section profile is missing {what}"));
    let vf = profile.vf.clone().ok_or_else(|| missing("V/F"))?;
    let f = profile.f.clone().ok_or_else(|| missing("F"))?;
    let omega1 = profile.omega1.clone();
    if !(mu > 0.0 && h > 0.0) {
        return Err(Error::Validation(format!("mu and h must be positive, got {mu}, {h}")));
    }
    let level = (2 * n + 1) as f64 * mu * h;
    let inv_mu2 = mu.powi(-2);
    let a = phase_fn(move |x, xi| {
        let w1 = omega1.as_ref().map_or(0.0, |o| o(x, xi));
        f(x, xi) * (-vf(x, xi) + level + inv_mu2 * w1)
    });
    Symbol1D::new(a, h / mu, profile.lx, profile.lxi, profile.rho)
}

/// Weyl-quantized symbol on the periodic collocation grid `x_j = −Lx + 2Lx·j/n`.
#[derive(Clone, Debug)]
pub struct Quantized {
    pub matrix: Mat<C64>,
    /// `max |M − M†|` before symmetrization.
    pub asymmetry: f64,
    pub nodes: Vec<f64>,
}

impl Quantized {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        dense_eigenvalues(&self.matrix)
    }

    /// Number of eigenvalues `≤ level`.
    pub fn count_below(&self, level: f64) -> Result<usize> {
        Ok(self.eigenvalues()?.iter().take_while(|&&l| l <= level).count())
    }
}

fn check_edge(sym: &Symbol1D, xi_max: f64) -> Result<()> {
    let Some(level) = sym.edge_level else { return Ok(()) };
    const SAMPLES: usize = 256;
    let (lx, lxi) = (sym.lx, sym.lxi.min(xi_max));
    let mut sign = 0.0;
    for k in 0..=SAMPLES {
        let t = -1.0 + 2.0 * k as f64 / SAMPLES as f64;
        for (x, xi) in [(-lx, t * lxi), (lx, t * lxi), (t * lx, -lxi), (t * lx, lxi)] {
            let d = sym.eval(x, xi) - level;
            if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
                return Err(Error::Validation(format!("level set touches box boundary near ({x:.4}, {xi:.4})")));
            }
            sign = d.signum();
        }
    }
    Ok(())
}

/// `M[j,l] = n⁻¹ Σ_m a((x_j+x_l)/2, ξ_m) e^{iξ_m(x_j−x_l)/ħ}` over the symmetric
/// frequency grid `ξ_m = πħm/Lx`, `|m| ≤ n/2`, Nyquist modes at half weight.
pub fn weyl_quantize(sym: &Symbol1D, n_modes: usize) -> Result<Quantized> {
    let n = n_modes;
    if !(4..=2048).contains(&n) || !n.is_multiple_of(2) {
        return Err(Error::Validation(format!("n_modes must be even and in [4, 2048], got {n}")));
    }
    let dxi = PI * sym.hbar / sym.lx;
    let half = n / 2;
    check_edge(sym, dxi * half as f64)?;
    let dx = 2.0 * sym.lx / n as f64;
    let nodes: Vec<f64> = (0..n).map(|j| -sym.lx + j as f64 * dx).collect();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    // kernel[s][d] for midpoint index s = j + l and offset d = (j − l) mod n
    let mut kernel = vec![C64::new(0.0, 0.0); (2 * n - 1) * n];
    for (s, row) in kernel.chunks_exact_mut(n).enumerate() {
        let mid = -sym.lx + 0.5 * s as f64 * dx;
        for (mp, b) in row.iter_mut().enumerate() {
            let v = if mp < half {
                sym.eval(mid, dxi * mp as f64)
            } else if mp > half {
                sym.eval(mid, dxi * (mp as f64 - n as f64))
            } else {
                let xn = dxi * half as f64;
                0.5 * (sym.eval(mid, xn) + sym.eval(mid, -xn))
            };
            *b = C64::new(v / n as f64, 0.0);
        }
        ifft.process(row);
    }
    let raw = Mat::from_fn(n, n, |j, l| kernel[(j + l) * n + (j + n - l) % n]);
    let mut asymmetry = 0.0f64;
    for j in 0..n {
        for l in 0..=j {
            asymmetry = asymmetry.max((raw[(j, l)] - raw[(l, j)].conj()).norm());
        }
    }
    let matrix = Mat::from_fn(n, n, |j, l| 0.5 * (raw[(j, l)] + raw[(l, j)].conj()));
    Ok(Quantized { matrix, asymmetry, nodes })
}

fn sublevel_length(sym: &Symbol1D, x: f64, half: f64, level: f64) -> f64 {
    if half <= 0.0 {
        return 0.0;
    }
    let f = |xi: f64| sym.eval(x, xi) - level;
    let mut cuts = vec![-half];
    cuts.extend(find_roots(f, -half, half, 64));
    cuts.push(half);
    cuts.windows(2)
        .filter(|w| f(0.5 * (w[0] + w[1])) <= 0.0)
        .map(|w| w[1] - w[0])
        .sum()
}

/// Area of `{|x| + |ξ| ≤ ρ, a(x, ξ) ≤ level}`, absolute tolerance 1e-9.
///
/// The ξ-length of the sublevel set is integrated in x between the points
/// where the level curve crosses the edge of the diamond.
pub fn phasespace_area(sym: &Symbol1D, level: f64) -> Result<f64> {
    const TOL: f64 = 1e-9;
    let rho = sym.rho;
    let mut cuts = vec![-rho, 0.0, rho];
    for sign in [-1.0, 1.0] {
        let edge = |x: f64| sym.eval(x, sign * (rho - x.abs())) - level;
        cuts.extend(find_roots(edge, -rho, 0.0, 256));
        cuts.extend(find_roots(edge, 0.0, rho, 256));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tol = TOL / (cuts.len() - 1) as f64;
    let len = |x: f64| sublevel_length(sym, x, rho - x.abs(), level);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        area += adaptive_gk(len, w[0], w[1], tol, 0.0)?.0;
    }
    Ok(area)
}

/// `(2πħ)⁻¹` times the phase-space area below `level` in the counting zone.
pub fn phasespace_count(sym: &Symbol1D, level: f64) -> Result<f64> {
    Ok(phasespace_area(sym, level)? / (2.0 * PI * sym.hbar))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `xξ + shift`.
    Saddle,
    /// `x² + ξ² + shift`.
    Extremum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleModelParams {
    pub w: f64,
    pub k: f64,
    pub omega1: f64,
    pub mu: f64,
    pub hbar: f64,
    pub kind: ModelKind,
}

impl SaddleModelParams {
    pub fn saddle(w: f64, k: f64, omega1: f64, mu: f64, hbar: f64) -> Self {
        SaddleModelParams { w, k, omega1, mu, hbar, kind: ModelKind::Saddle }
    }

    pub fn symbol(&self, shift: f64, rho: f64) -> Result<Symbol1D> {
        let a = match self.kind {
            ModelKind::Saddle => phase_fn(move |x, xi| x * xi + shift),
            ModelKind::Extremum => phase_fn(move |x, xi| x * x + xi * xi + shift),
        };
        Symbol1D::new(a, self.hbar, rho, rho, rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCoefficient {
    pub count_unperturbed: f64,
    pub count_perturbed: f64,
    /// Count change per unit perturbation `μ⁻²ω₁k⁻¹`.
    pub measured: f64,
    /// `(2πħ)⁻¹ log(ρ/(|w|^{1/2} + μ⁻¹))`.
    pub predicted: f64,
}

/// Response of the zone count of the model symbol to the `μ⁻²ω₁` shift.
pub fn saddle_log_coefficient(p: &SaddleModelParams, rho: f64) -> Result<LogCoefficient> {
    if !(p.k > 0.0 && p.mu > 0.0 && p.hbar > 0.0) {
        return Err(Error::Validation("k, mu and hbar must be positive".into()));
    }
    let base = p.w / p.k;
    let delta = p.omega1 / (p.mu * p.mu * p.k);
    let quarter = 0.25 * rho * rho;
    let small = 0.01 * rho * rho;
    if p.w.abs() > quarter {
        return Err(Error::Validation(format!("|w| = {} exceeds rho^2/4 = {quarter}", p.w.abs())));
    }
    if !(delta.abs() <= 0.1 * base.abs() || (base.abs() <= small && delta.abs() <= small)) {
        return Err(Error::Validation(format!(
            "perturbation mu^-2 omega1 / k = {delta:.3e} is not small against w / k = {base:.3e}"
        )));
    }
    let count_unperturbed = phasespace_count(&p.symbol(base, rho)?, 0.0)?;
    let (count_perturbed, measured) = if delta == 0.0 {
        (count_unperturbed, 0.0)
    } else {
        let c = phasespace_count(&p.symbol(base + delta, rho)?, 0.0)?;
        (c, (c - count_unperturbed) / delta)
    };
    let predicted = (rho / (p.w.abs().sqrt() + 1.0 / p.mu)).ln() / (2.0 * PI * p.hbar);
    Ok(LogCoefficient { count_unperturbed, count_perturbed, measured, predicted })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: f64,
    pub count_unperturbed: f64,
    pub count_perturbed: f64,
    pub measured_coeff: f64,
    pub predicted_coeff: f64,
}

/// `saddle_log_coefficient` over `ws`, sorted by `w`.
pub fn saddle_sweep(p: &SaddleModelParams, rho: f64, ws: &[f64]) -> Result<Vec<SweepRow>> {
    let mut ws = ws.to_vec();
    ws.sort_by(f64::total_cmp);
    ws.iter()
        .map(|&w| {
            let c = saddle_log_coefficient(&SaddleModelParams { w, ..*p }, rho)?;
            Ok(SweepRow {
                w,
                count_unperturbed: c.count_unperturbed,
                count_perturbed: c.count_perturbed,
                measured_coeff: c.measured,
                predicted_coeff: c.predicted,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("w,count_unperturbed,count_perturbed,measured_coeff,predicted_coeff\n");
    for r in rows {
        out += &format!(
            "{:e},{:e},{:e},{:e},{:e}\n",
            r.w, r.count_unperturbed, r.count_perturbed, r.measured_coeff, r.predicted_coeff
        );
    }
    out
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, sweep_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Fit of `count(xξ + w) − count(xξ) ≈ c₁ w log(1/w) + c₂ w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSignature {
    pub ws: Vec<f64>,
    pub differences: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// `max_i |residual_i / difference_i|`.
    pub max_rel_residual: f64,
    /// Same for the best fit of the form `c w`.
    pub rel_residual_without_log: f64,
    /// `−2πħ c₁`: number of hyperbola branches seen by the fit.
    pub branches: f64,
}

impl LogSignature {
    pub fn log_term_present(&self) -> bool {
        self.c1 != 0.0 && self.rel_residual_without_log > 5.0 * self.max_rel_residual
    }
}

pub fn log_signature(hbar: f64, rho: f64, ws: &[f64]) -> Result<LogSignature> {
    if ws.len() < 3 || ws.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Validation("log-signature sweep needs at least 3 positive w".into()));
    }
    let mut ws = ws.to_vec();
    ws.sort_by(f64::total_cmp);
    let model = SaddleModelParams::saddle(0.0, 1.0, 0.0, 1.0, hbar);
    let c0 = phasespace_count(&model.symbol(0.0, rho)?, 0.0)?;
    let differences = ws
        .iter()
        .map(|&w| Ok(phasespace_count(&model.symbol(w, rho)?, 0.0)? - c0))
        .collect::<Result<Vec<f64>>>()?;
    let weights: Vec<f64> = differences.iter().map(|d| d.powi(-2)).collect();
    let rel = |res: &[f64]| res.iter().zip(&differences).map(|(r, d)| (r / d).abs()).fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = ws.iter().map(|&w| vec![w * (1.0 / w).ln(), w]).collect();
    let fit = least_squares(&rows, &differences, Some(&weights))?;
    let lin: Vec<Vec<f64>> = ws.iter().map(|&w| vec![w]).collect();
    let lin_fit = least_squares(&lin, &differences, Some(&weights))?;
    let (c1, c2) = (fit.coef[0], fit.coef[1]);
    Ok(LogSignature {
        max_rel_residual: rel(&fit.residuals),
        rel_residual_without_log: rel(&lin_fit.residuals),
        branches: -2.0 * PI * hbar * c1,
        ws,
        differences,
        c1,
        c2,
    })
}

#[cfg(test)]
mod tests;

//! Magnetic Weyl expression, σ-gap, saddle-point correction terms, regime
//! classification and the assembled asymptotic prediction.

mod weyl;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use weyl::{integrate_weyl, level_count, magnetic_weyl_density};

use crate::critpoints::{CritOptions, CriticalPoint};
use crate::error::{Error, Result};
use crate::fields::{CoefficientSet, ScalarField};
use crate::quadrature::simpson_2d;

/// `μ`, `h` and the constants that place `(μ, h)` in a regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub mu: f64,
    pub h: f64,
    /// Spectral level `τ` of the density (the counting functional uses 0).
    #[serde(default)]
    pub tau: f64,
    pub c_i: f64,
    pub c_ii: f64,
    pub c_log: f64,
    pub eps_ss: f64,
    /// Corrections are switched on once `μ³h` reaches this value.
    pub corr_threshold: f64,
    #[serde(default)]
    pub kappa2: Option<f64>,
    /// Constant `ς` of the superstrong term `μh∫ςψ dx`.
    #[serde(default)]
    pub varsigma: Option<f64>,
}

impl RegimeParams {
    pub fn new(mu: f64, h: f64) -> Result<Self> {
        let rp = RegimeParams {
            mu,
            h,
            tau: 0.0,
            c_i: 1.0,
            c_ii: 1.0,
            c_log: 1.0,
            eps_ss: 1.0,
            corr_threshold: 2.0,
            kappa2: None,
            varsigma: None,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 1.0) {
            return Err(Error::Validation(format!("mu must be >= 1, got {}", self.mu)));
        }
        if !(self.h > 0.0 && self.h <= 0.5) {
            return Err(Error::Validation(format!("h must lie in (0, 0.5], got {}", self.h)));
        }
        for (name, v) in [
            ("C_i", self.c_i),
            ("C_ii", self.c_ii),
            ("C_log", self.c_log),
            ("eps_ss", self.eps_ss),
            ("corr_threshold", self.corr_threshold),
        ] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_mu_h(&self, mu: f64, h: f64) -> Result<Self> {
        let rp = RegimeParams { mu, h, ..self.clone() };
        rp.validate()?;
        Ok(rp)
    }
}

/// Parameter regime of `(μ, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Regime {
    /// `μ ≤ C_i h^{-1/3}`: standard asymptotics without corrections.
    Weak,
    /// `C_i h^{-1/3} < μ ≤ C_ii h^{-1}`; `corr2` once `μ > C_log (h|log h|)⁻¹`.
    Intermediate { corr2: bool },
    /// `μh > eps_ss`.
    Superstrong,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Weak => "weak(i)",
            Regime::Intermediate { corr2: false } => "intermediate(ii)",
            Regime::Intermediate { corr2: true } => "intermediate-with-corr2",
            Regime::Superstrong => "superstrong",
        }
    }

    pub fn has_corrections(&self) -> bool {
        !matches!(self, Regime::Weak)
    }

    pub fn has_corr2(&self) -> bool {
        matches!(self, Regime::Intermediate { corr2: true })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl From<Regime> for String {
    fn from(r: Regime) -> String {
        r.label().to_string()
    }
}

impl TryFrom<String> for Regime {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.as_str() {
            "weak(i)" => Ok(Regime::Weak),
            "intermediate(ii)" => Ok(Regime::Intermediate { corr2: false }),
            "intermediate-with-corr2" => Ok(Regime::Intermediate { corr2: true }),
            "superstrong" => Ok(Regime::Superstrong),
            other => Err(format!("unknown regime label {other:?}")),
        }
    }
}

/// Ties at every threshold resolve to the lower regime.
pub fn classify_regime(rp: &RegimeParams) -> Regime {
    let (mu, h) = (rp.mu, rp.h);
    if mu * h > rp.eps_ss || mu > rp.c_ii / h {
        Regime::Superstrong
    } else if mu <= rp.c_i * h.powf(-1.0 / 3.0) {
        Regime::Weak
    } else {
        Regime::Intermediate { corr2: mu > rp.c_log / (h * h.ln().abs()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaGap {
    pub sigma: f64,
    pub nbar: u64,
}

/// `min_{n ≥ 0} |V − (2n+1)Fμh|` and its minimizer (ties go to smaller `n`).
pub fn sigma_gap(v: f64, f: f64, mu: f64, h: f64) -> SigmaGap {
    let step = f * mu * h;
    let star = ((v / step - 1.0) * 0.5).max(0.0);
    let lo = star.floor() as u64;
    let gap = |n: u64| (v - (2 * n + 1) as f64 * step).abs();
    let (s0, s1) = (gap(lo), gap(lo + 1));
    if s1 < s0 {
        SigmaGap { sigma: s1, nbar: lo + 1 }
    } else {
        SigmaGap { sigma: s0, nbar: lo }
    }
}

/// `ϰ = −(4π)⁻¹ (⅛κV²F⁻¹ − ¼V𝓛(V/F)) |det Hess(V/F)|^{-1/2} √g`.
pub fn varkappa_coeff(cp: &CriticalPoint) -> Result<f64> {
    if !(cp.det_hessian < 0.0) {
        return Err(Error::Validation(format!(
            "varkappa needs a saddle, got det Hess = {:.3e} at ({:.4}, {:.4})",
            cp.det_hessian, cp.location[0], cp.location[1]
        )));
    }
    let bracket = 0.125 * cp.curvature_value * cp.v_value * cp.v_value / cp.f_value
        - 0.25 * cp.v_value * cp.lb_vf_value;
    Ok(-bracket / (4.0 * PI) / cp.k * cp.sqrt_g_value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerm {
    pub value: f64,
    pub varkappa: f64,
    pub sigma: f64,
    pub nbar: u64,
    /// `μ³h` is below the activation threshold; `value` is 0.
    pub below_threshold: bool,
}

/// `μ⁻¹h⁻¹ ϰ log((σ + μ⁻²)(1 + μ⁻¹h⁻¹))` at a saddle.
pub fn corr_term(cp: &CriticalPoint, rp: &RegimeParams) -> Result<CorrectionTerm> {
    let varkappa = varkappa_coeff(cp)?;
    let (mu, h) = (rp.mu, rp.h);
    let gap = sigma_gap(cp.v_value, cp.f_value, mu, h);
    let below = mu.powi(3) * h < rp.corr_threshold;
    let value = if below {
        0.0
    } else {
        let inv = 1.0 / (mu * h);
        inv * varkappa * ((gap.sigma + mu.powi(-2)) * (1.0 + inv)).ln()
    };
    Ok(CorrectionTerm { value, varkappa, sigma: gap.sigma, nbar: gap.nbar, below_threshold: below })
}

/// `ϰ₂ μh log((σ + h²)(1 + μ⁻¹h⁻¹))`, active only in the corr2 regime.
pub fn corr2_term(cp: &CriticalPoint, rp: &RegimeParams) -> Result<f64> {
    if !classify_regime(rp).has_corr2() {
        return Ok(0.0);
    }
    let kappa2 = rp
        .kappa2
        .ok_or_else(|| Error::Validation("corr2 coefficient required (set kappa2)".into()))?;
    let (mu, h) = (rp.mu, rp.h);
    let sigma = sigma_gap(cp.v_value, cp.f_value, mu, h).sigma;
    Ok(kappa2 * mu * h * ((sigma + h * h) * (1.0 + 1.0 / (mu * h))).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleCorrection {
    pub point: CriticalPoint,
    pub term: CorrectionTerm,
    pub psi_value: f64,
    /// `corr_term · ψ(x_j)`.
    pub corr_value: f64,
    /// `corr2_term · ψ(x_j)`.
    pub corr2_value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prediction {
    pub weyl_integral: f64,
    pub saddle_corrections: Vec<SaddleCorrection>,
    pub regime: Regime,
    /// `μh ∫ςψ dx`, superstrong regime only.
    pub superstrong_term: f64,
    pub total: f64,
    /// `n̄(x)` at the coefficient-grid nodes.
    #[serde(skip)]
    pub nbar_field: Vec<u64>,
}

impl Prediction {
    pub fn corr_sum(&self) -> f64 {
        self.saddle_corrections.iter().map(|c| c.corr_value).sum()
    }

    pub fn corr2_sum(&self) -> f64 {
        self.saddle_corrections.iter().map(|c| c.corr2_value).sum()
    }
}

/// Weyl integral plus the saddle corrections active in the regime of `rp`.
pub fn predict(
    coeffs: &CoefficientSet,
    psi: &ScalarField,
    rp: &RegimeParams,
    saddles: &[CriticalPoint],
) -> Result<Prediction> {
    rp.validate()?;
    let regime = classify_regime(rp);
    let nondeg = CritOptions::default().nondeg_tol;
    for s in saddles {
        if s.det_hessian.abs() < nondeg {
            return Err(Error::DegenerateCriticalPoint {
                x: s.location[0],
                y: s.location[1],
                det: s.det_hessian.abs(),
            });
        }
    }
    let weyl_integral = integrate_weyl(coeffs, psi, rp.tau, rp.mu, rp.h)?;
    let mut saddle_corrections = Vec::new();
    if regime.has_corrections() {
        for s in saddles.iter().filter(|s| s.is_saddle() && !s.boundary_unreliable) {
            let term = corr_term(s, rp)?;
            let psi_value = psi.eval(s.location);
            let corr2 = corr2_term(s, rp)?;
            saddle_corrections.push(SaddleCorrection {
                point: s.clone(),
                term,
                psi_value,
                corr_value: term.value * psi_value,
                corr2_value: corr2 * psi_value,
            });
        }
    }
    let superstrong_term = match (regime, rp.varsigma) {
        (Regime::Superstrong, Some(vs)) => rp.mu * rp.h * vs * simpson_2d(&psi.grid, &psi.values),
        _ => 0.0,
    };
    let total = weyl_integral
        + saddle_corrections.iter().map(|c| c.corr_value).sum::<f64>()
        + saddle_corrections.iter().map(|c| c.corr2_value).sum::<f64>()
        + superstrong_term;
    let grid = coeffs.grid;
    let nbar_field = grid
        .nodes()
        .map(|(i, j)| {
            let k = grid.index(i, j);
            let lg = coeffs.local(grid.point(i, j), 0);
            sigma_gap(coeffs.samples.v[k], lg.f.value(), rp.mu, rp.h).nbar
        })
        .collect();
    Ok(Prediction { weyl_integral, saddle_corrections, regime, superstrong_term, total, nbar_field })
}

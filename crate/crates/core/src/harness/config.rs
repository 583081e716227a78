//! TOML run configuration: `[scenario]`, `[regime]`, `[grid]`, `[sweep]`,
//! `[constants]` and an optional `[model1d]` section.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::ScenarioConfig;
use crate::asymptote::RegimeParams;
use crate::error::{Error, Result};
use crate::oracle::OracleOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub mu: f64,
    pub h: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varsigma: Option<f64>,
}

fn default_interior() -> usize {
    48
}

fn default_order() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Interior oracle nodes per axis.
    #[serde(default = "default_interior")]
    pub interior: usize,
    #[serde(default = "default_order")]
    pub stencil_order: usize,
    #[serde(default = "default_max_flux")]
    pub max_flux: f64,
    #[serde(default = "default_length_ratio")]
    pub min_length_ratio: f64,
}

fn default_max_flux() -> f64 {
    OracleOptions::default().max_flux
}

fn default_length_ratio() -> f64 {
    OracleOptions::default().min_length_ratio
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            interior: default_interior(),
            stencil_order: default_order(),
            max_flux: default_max_flux(),
            min_length_ratio: default_length_ratio(),
        }
    }
}

impl GridConfig {
    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            max_flux: self.max_flux,
            min_length_ratio: self.min_length_ratio,
            stencil_order: self.stencil_order,
            ..OracleOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    H,
    Mu,
    /// Points are signed offsets `w = −V/F + (2n̄+1)μh` at the saddle; `σ = |w|`.
    Sigma,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::H => "h",
            SweepAxis::Mu => "mu",
            SweepAxis::Sigma => "sigma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    /// h-axis: `μ = mu_scale · h^{mu_exponent}`; `[regime].mu` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_exponent: Option<f64>,
    #[serde(default = "unit")]
    pub mu_scale: f64,
    /// sigma-axis Landau index; nearest level to the saddle value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<u64>,
    /// Interior size of the second oracle run that measures discretization
    /// error; no check when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_interior: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "unit")]
    pub c_i: f64,
    #[serde(default = "unit")]
    pub c_ii: f64,
    #[serde(default = "unit")]
    pub c_log: f64,
    #[serde(default = "unit")]
    pub eps_ss: f64,
    #[serde(default = "default_threshold")]
    pub corr_threshold: f64,
}

fn default_threshold() -> f64 {
    2.0
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c_i: 1.0, c_ii: 1.0, c_log: 1.0, eps_ss: 1.0, corr_threshold: 2.0 }
    }
}

fn default_ws() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect()
}

/// Saddle-model sweep parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model1dConfig {
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "unit")]
    pub rho: f64,
    #[serde(default = "unit")]
    pub k: f64,
    #[serde(default = "default_w1")]
    pub omega1: f64,
    #[serde(default = "default_model_mu")]
    pub mu: f64,
    #[serde(default = "default_ws")]
    pub ws: Vec<f64>,
}

fn default_hbar() -> f64 {
    0.05
}

fn default_w1() -> f64 {
    0.01
}

fn default_model_mu() -> f64 {
    10.0
}

impl Default for Model1dConfig {
    fn default() -> Self {
        Model1dConfig {
            hbar: default_hbar(),
            rho: 1.0,
            k: 1.0,
            omega1: default_w1(),
            mu: default_model_mu(),
            ws: default_ws(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub regime: RegimeConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model1d: Option<Model1dConfig>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.regime_params()?;
        if let Some(s) = &self.sweep {
            if s.points.is_empty() {
                return Err(Error::Validation("sweep needs at least one point".into()));
            }
        }
        Ok(())
    }

    pub fn regime_params(&self) -> Result<RegimeParams> {
        let c = &self.constants;
        let rp = RegimeParams {
            mu: self.regime.mu,
            h: self.regime.h,
            tau: self.regime.tau,
            c_i: c.c_i,
            c_ii: c.c_ii,
            c_log: c.c_log,
            eps_ss: c.eps_ss,
            corr_threshold: c.corr_threshold,
            kappa2: self.regime.kappa2,
            varsigma: self.regime.varsigma,
        };
        rp.validate()?;
        Ok(rp)
    }

    /// Hex SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

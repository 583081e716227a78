//! Built-in and polynomial coefficient scenarios.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{bump, field_fn, CoefficientFns, CoefficientSet, FieldFn, Grid2D, Jet, ScalarField};

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Polynomial `Σ c x^i y^j` stored as `(i, j, c)` terms.
pub type Poly = Vec<(u32, u32, f64)>;

fn unit_poly() -> Poly {
    vec![(0, 0, 1.0)]
}

fn poly_fn(p: &Poly) -> FieldFn {
    let terms = p.clone();
    field_fn(move |x: Jet, y: Jet| {
        let mut acc = Jet::constant(0.0, x.order());
        for &(i, j, c) in &terms {
            acc = acc + x.powi(i as i32) * y.powi(j as i32) * c;
        }
        acc
    })
}

/// Coefficient family. Unless stated, `g^{jk} = δ` and `A = b(−x₂/2, x₁/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioKind {
    /// `V ≡ v0`.
    Constant {
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        v0: f64,
    },
    /// `V = v0 + c r²`.
    Radial {
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        v0: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// `V = v0 + αx₁² − βx₂²`.
    Saddle {
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        v0: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "two")]
        beta: f64,
    },
    /// `V = v0 + c x₁x₂` (`𝓛(V/F) = 0` at the saddle).
    HarmonicSaddle {
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        v0: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// `V = v0 + tx x₁ + ty x₂`: no critical points.
    Tilted {
        #[serde(default = "one")]
        b: f64,
        #[serde(default = "one")]
        v0: f64,
        #[serde(default)]
        tx: f64,
        #[serde(default)]
        ty: f64,
    },
    /// Round metric in the stereographic chart, `F ≡ 1`, `V = v0 + c(x₁² − x₂²)/2`.
    Sphere {
        #[serde(default = "one")]
        v0: f64,
        #[serde(default)]
        c: f64,
    },
    Polynomial {
        #[serde(default = "unit_poly")]
        g11: Poly,
        #[serde(default)]
        g12: Poly,
        #[serde(default = "unit_poly")]
        g22: Poly,
        #[serde(default)]
        a1: Poly,
        #[serde(default)]
        a2: Poly,
        v: Poly,
    },
    /// `V = (2n̄+1)μhF + W`, `F = b`.
    Resonant {
        #[serde(default = "one")]
        b: f64,
        #[serde(default)]
        nbar: u64,
        w: Poly,
    },
}

/// Cutoff `ψ = exp(1 − 1/(1 − (r/R)^p))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "two")]
    pub exponent: f64,
}

fn default_radius() -> f64 {
    0.45
}

impl Default for PsiSpec {
    fn default() -> Self {
        PsiSpec { center: [0.0, 0.0], radius: 0.45, exponent: 2.0 }
    }
}

fn default_epsilon0() -> f64 {
    1e-3
}

fn default_search_radius() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
    /// Computational square `[−L, L]²`.
    #[serde(default = "one")]
    pub half_width: f64,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    #[serde(default = "default_search_radius")]
    pub search_radius: f64,
    /// Amplitude of the seeded random perturbation `ε(u₁x₁ + u₂x₂ + u₃x₁x₂)` of `V`.
    #[serde(default)]
    pub perturb: f64,
    #[serde(default)]
    pub psi: PsiSpec,
}

impl ScenarioConfig {
    pub fn new(name: &str, kind: ScenarioKind) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            kind,
            half_width: 1.0,
            epsilon0: default_epsilon0(),
            search_radius: default_search_radius(),
            perturb: 0.0,
            psi: PsiSpec::default(),
        }
    }

    /// Resonant scenarios drop the lower bound on `V`.
    pub fn requires_potential_bound(&self) -> bool {
        !matches!(self.kind, ScenarioKind::Resonant { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.psi;
        if !(p.radius > 0.0 && p.exponent > 0.0) {
            return Err(Error::Validation("psi radius and exponent must be positive".into()));
        }
        if p.center[0].hypot(p.center[1]) + p.radius > 0.5 {
            return Err(Error::Validation(format!(
                "psi must be supported in B(0, 1/2); centre {:?} with radius {} reaches beyond",
                p.center, p.radius
            )));
        }
        if !(self.half_width >= 0.5 && self.half_width <= 1.0) {
            return Err(Error::Validation(format!("half_width must lie in [0.5, 1], got {}", self.half_width)));
        }
        if !(self.search_radius > 0.0 && self.search_radius <= 1.0) {
            return Err(Error::Validation(format!("search_radius must lie in (0, 1], got {}", self.search_radius)));
        }
        if !(self.epsilon0 > 0.0 && self.perturb >= 0.0) {
            return Err(Error::Validation("epsilon0 must be positive and perturb non-negative".into()));
        }
        Ok(())
    }
}

fn symmetric_gauge(b: f64) -> (FieldFn, FieldFn) {
    (field_fn(move |_, y: Jet| y * (-0.5 * b)), field_fn(move |x: Jet, _| x * (0.5 * b)))
}

/// A constructed scenario on its computational grid.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub coeffs: CoefficientSet,
    pub psi: ScalarField,
    /// Canonical description used for cache keys.
    pub fingerprint: String,
}

impl Scenario {
    /// Builds coefficients for `(μ, h)` (only resonant scenarios depend on
    /// them) on `grid` and validates ellipticity, `F ≥ ε₀` and `V ≥ ε₀`.
    pub fn build(cfg: &ScenarioConfig, grid: Grid2D, mu: f64, h: f64, seed: u64) -> Result<Scenario> {
        cfg.validate()?;
        let potential = |f: FieldFn| -> FieldFn {
            if cfg.perturb == 0.0 {
                return f;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let eps = cfg.perturb;
            field_fn(move |x: Jet, y: Jet| f(x, y) + (x * u[0] + y * u[1] + x * y * u[2]) * eps)
        };
        let eps0 = cfg.epsilon0;
        let coeffs = match &cfg.kind {
            ScenarioKind::Constant { b, v0 } => {
                let (a1, a2) = symmetric_gauge(*b);
                let v0 = *v0;
                CoefficientSet::euclidean(grid, a1, a2, potential(field_fn(move |x: Jet, _| Jet::constant(v0, x.order()))), eps0)?
            }
            ScenarioKind::Radial { b, v0, c } => {
                let (a1, a2) = symmetric_gauge(*b);
                let (v0, c) = (*v0, *c);
                CoefficientSet::euclidean(grid, a1, a2, potential(field_fn(move |x: Jet, y: Jet| (x * x + y * y) * c + v0)), eps0)?
            }
            ScenarioKind::Saddle { b, v0, alpha, beta } => {
                let (a1, a2) = symmetric_gauge(*b);
                let (v0, al, be) = (*v0, *alpha, *beta);
                let v = field_fn(move |x: Jet, y: Jet| x * x * al - y * y * be + v0);
                CoefficientSet::euclidean(grid, a1, a2, potential(v), eps0)?
            }
            ScenarioKind::HarmonicSaddle { b, v0, c } => {
                let (a1, a2) = symmetric_gauge(*b);
                let (v0, c) = (*v0, *c);
                CoefficientSet::euclidean(grid, a1, a2, potential(field_fn(move |x: Jet, y: Jet| x * y * c + v0)), eps0)?
            }
            ScenarioKind::Tilted { b, v0, tx, ty } => {
                let (a1, a2) = symmetric_gauge(*b);
                let (v0, tx, ty) = (*v0, *tx, *ty);
                CoefficientSet::euclidean(grid, a1, a2, potential(field_fn(move |x: Jet, y: Jet| x * tx + y * ty + v0)), eps0)?
            }
            ScenarioKind::Sphere { v0, c } => {
                let (v0, c) = (*v0, *c);
                // A = (−x₂, x₁)/(2(1 + r²/4)) gives F₁₂ = (1 + r²/4)⁻², hence F ≡ 1
                let conf = field_fn(|x: Jet, y: Jet| {
                    let s = (x * x + y * y) * 0.25 + 1.0;
                    s * s
                });
                let zero = field_fn(|x: Jet, _| Jet::constant(0.0, x.order()));
                let fns = CoefficientFns {
                    g11: conf.clone(),
                    g12: zero,
                    g22: conf,
                    a1: field_fn(|x: Jet, y: Jet| y * -0.5 / ((x * x + y * y) * 0.25 + 1.0)),
                    a2: field_fn(|x: Jet, y: Jet| x * 0.5 / ((x * x + y * y) * 0.25 + 1.0)),
                    v: potential(field_fn(move |x: Jet, y: Jet| (x * x - y * y) * (0.5 * c) + v0)),
                };
                CoefficientSet::new(grid, fns, eps0)?
            }
            ScenarioKind::Polynomial { g11, g12, g22, a1, a2, v } => {
                let fns = CoefficientFns {
                    g11: poly_fn(g11),
                    g12: poly_fn(g12),
                    g22: poly_fn(g22),
                    a1: poly_fn(a1),
                    a2: poly_fn(a2),
                    v: potential(poly_fn(v)),
                };
                CoefficientSet::new(grid, fns, eps0)?
            }
            ScenarioKind::Resonant { b, nbar, w } => {
                let (a1, a2) = symmetric_gauge(*b);
                let base = (2 * nbar + 1) as f64 * mu * h * b;
                let w = poly_fn(w);
                CoefficientSet::euclidean(grid, a1, a2, potential(Arc::new(move |x, y| w(x, y) + base)), eps0)?
            }
        };
        coeffs.validate(cfg.requires_potential_bound())?;
        let psi = bump(grid, cfg.psi.center, cfg.psi.radius, cfg.psi.exponent)?;
        let mut fp = serde_json::to_string(cfg)?;
        if matches!(cfg.kind, ScenarioKind::Resonant { .. }) {
            fp += &format!("|mu={}|h={}", mu.to_bits(), h.to_bits());
        }
        if cfg.perturb != 0.0 {
            fp += &format!("|seed={seed}");
        }
        Ok(Scenario { name: cfg.name.clone(), coeffs, psi, fingerprint: fp })
    }
}

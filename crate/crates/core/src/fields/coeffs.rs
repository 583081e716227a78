use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{FieldFn, Grid2D};
use super::jet::Jet;
use crate::error::{Error, Result};

/// How `F⁻¹g^{jk}` is read when building the auxiliary metric for curvature
/// and the Laplace–Beltrami operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricReading {
    /// `G^{jk} = F⁻¹ g^{jk}` is the inverse (contravariant) metric.
    #[default]
    Contravariant,
    /// `G_{jk} = F⁻¹ g^{jk}` is the metric tensor itself.
    Covariant,
}

/// Where derivatives of the coefficient fields come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Jet evaluation of the analytic callbacks.
    #[default]
    Analytic,
    /// Fourth-order finite differences of the grid samples.
    Stencil,
}

/// The analytic callbacks of a coefficient set.
#[derive(Clone)]
pub struct CoefficientFns {
    pub g11: FieldFn,
    pub g12: FieldFn,
    pub g22: FieldFn,
    pub a1: FieldFn,
    pub a2: FieldFn,
    pub v: FieldFn,
}

/// Nodal samples of the coefficient fields.
#[derive(Clone, Debug)]
pub struct CoefficientSamples {
    pub g11: Vec<f64>,
    pub g12: Vec<f64>,
    pub g22: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub v: Vec<f64>,
}

/// Inverse metric `g^{jk}`, magnetic potential `(V₁, V₂)` and electric
/// potential `V` on a computational square.
#[derive(Clone)]
pub struct CoefficientSet {
    pub grid: Grid2D,
    pub fns: Arc<CoefficientFns>,
    pub samples: CoefficientSamples,
    pub epsilon0: f64,
    pub reading: MetricReading,
    pub derivatives: DerivativeMode,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("grid", &self.grid)
            .field("epsilon0", &self.epsilon0)
            .field("reading", &self.reading)
            .field("derivatives", &self.derivatives)
            .finish_non_exhaustive()
    }
}

fn sample(grid: &Grid2D, f: &FieldFn) -> Result<Vec<f64>> {
    grid.nodes()
        .map(|(i, j)| {
            let (x, y) = Jet::coords(grid.x(i), grid.y(j), 0);
            let v = f(x, y).value();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numerical(format!("non-finite coefficient at node ({i}, {j})")))
            }
        })
        .collect()
}

impl CoefficientSet {
    pub fn new(grid: Grid2D, fns: CoefficientFns, epsilon0: f64) -> Result<Self> {
        if !(epsilon0 > 0.0) {
            return Err(Error::Validation("epsilon0 must be positive".into()));
        }
        let samples = CoefficientSamples {
            g11: sample(&grid, &fns.g11)?,
            g12: sample(&grid, &fns.g12)?,
            g22: sample(&grid, &fns.g22)?,
            a1: sample(&grid, &fns.a1)?,
            a2: sample(&grid, &fns.a2)?,
            v: sample(&grid, &fns.v)?,
        };
        let set = CoefficientSet {
            grid,
            fns: Arc::new(fns),
            samples,
            epsilon0,
            reading: MetricReading::default(),
            derivatives: DerivativeMode::default(),
        };
        set.check_metric()?;
        Ok(set)
    }

    /// Euclidean metric `g^{jk} = δ`.
    pub fn euclidean(grid: Grid2D, a1: FieldFn, a2: FieldFn, v: FieldFn, epsilon0: f64) -> Result<Self> {
        let one: FieldFn = Arc::new(|x: Jet, _| Jet::constant(1.0, x.order()));
        let zero: FieldFn = Arc::new(|x: Jet, _| Jet::constant(0.0, x.order()));
        CoefficientSet::new(
            grid,
            CoefficientFns { g11: one.clone(), g12: zero, g22: one, a1, a2, v },
            epsilon0,
        )
    }

    pub fn with_reading(mut self, reading: MetricReading) -> Self {
        self.reading = reading;
        self
    }

    pub fn with_derivatives(mut self, mode: DerivativeMode) -> Self {
        self.derivatives = mode;
        self
    }

    /// Positivity of the smallest eigenvalue of `g^{jk}` at every node.
    fn check_metric(&self) -> Result<()> {
        let s = &self.samples;
        for (i, j) in self.grid.nodes() {
            let k = self.grid.index(i, j);
            let lam = min_eigenvalue(s.g11[k], s.g12[k], s.g22[k]);
            if !(lam > 0.0) {
                return Err(Error::MetricNotPositive { i, j });
            }
        }
        Ok(())
    }

    /// Checks ellipticity `g^{jk} ≥ ε₀` and `F ≥ ε₀` and, when `require_potential_bound` is
    /// set, the lower bound `V ≥ ε₀`.
    pub fn validate(&self, require_potential_bound: bool) -> Result<()> {
        let eps = self.epsilon0;
        let s = &self.samples;
        for (i, j) in self.grid.nodes() {
            let k = self.grid.index(i, j);
            let lam = min_eigenvalue(s.g11[k], s.g12[k], s.g22[k]);
            if lam < eps {
                return Err(Error::Validation(format!(
                    "metric ellipticity g^jk >= eps fails at node ({i}, {j}): min eigenvalue {lam:.3e}"
                )));
            }
            let p = self.grid.point(i, j);
            let f = self.local(p, 0).f.value();
            if f < eps {
                return Err(Error::Validation(format!(
                    "F ≥ ε₀ fails at ({:.4}, {:.4}): F = {f:.3e}",
                    p[0], p[1]
                )));
            }
            if require_potential_bound && s.v[k] < eps {
                return Err(Error::Validation(format!(
                    "V ≥ ε₀ fails at ({:.4}, {:.4}): V = {:.3e}",
                    p[0], p[1], s.v[k]
                )));
            }
        }
        // F is continuous, so a sign change of F₁₂ between neighbours means a zero in between
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let h = 0.5 * self.grid.spacing();
        for (i, j) in self.grid.nodes() {
            let p = self.grid.point(i, j);
            let f12 = self.local(p, 0).f12.value();
            for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                if i + di >= nx || j + dj >= ny {
                    continue;
                }
                let q = self.grid.point(i + di, j + dj);
                let mid = [p[0] + di as f64 * h, p[1] + dj as f64 * h];
                let lm = self.local(mid, 0);
                let other = self.local(q, 0).f12.value();
                if f12 * other <= 0.0 || lm.f.value() < eps {
                    return Err(Error::Validation(format!(
                        "F ≥ ε₀ fails between ({:.4}, {:.4}) and ({:.4}, {:.4}): F₁₂ changes sign or F = {:.3e}",
                        p[0], p[1], q[0], q[1], lm.f.value()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Analytic local geometry at `p` with derivatives up to `order` (≤ 2).
    pub fn local(&self, p: [f64; 2], order: u8) -> LocalGeometry {
        LocalGeometry::new(&self.fns, self.reading, p, order)
    }
}

pub(crate) fn min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let tr = a + c;
    let det = a * c - b * b;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    if tr >= 0.0 {
        // stable form of (tr - disc)/2
        det / (0.5 * (tr + disc))
    } else {
        0.5 * (tr - disc)
    }
}

/// Jets of the derived quantities at one point.
#[derive(Clone, Copy, Debug)]
pub struct LocalGeometry {
    pub point: [f64; 2],
    /// `F₁₂ = ∂₁V₂ − ∂₂V₁`.
    pub f12: Jet,
    /// Field intensity `F = |F₁₂| det(g^{jk})^{1/2}`.
    pub f: Jet,
    /// Area density `√g = det(g^{jk})^{-1/2}`.
    pub sqrt_g: Jet,
    pub v: Jet,
    pub vf: Jet,
    /// Auxiliary metric, contravariant components `[G¹¹, G¹², G²²]`.
    pub g_up: [Jet; 3],
    /// Auxiliary metric, covariant components `[G₁₁, G₁₂, G₂₂]`.
    pub g_down: [Jet; 3],
}

impl LocalGeometry {
    pub fn new(fns: &CoefficientFns, reading: MetricReading, p: [f64; 2], order: u8) -> Self {
        let order = order.min(2);
        let (x, y) = Jet::coords(p[0], p[1], order + 1);
        let f12 = (fns.a2)(x, y).d_dx() - (fns.a1)(x, y).d_dy();
        let (x, y) = Jet::coords(p[0], p[1], order);
        let g11 = (fns.g11)(x, y);
        let g12 = (fns.g12)(x, y);
        let g22 = (fns.g22)(x, y);
        let det = g11 * g22 - g12 * g12;
        let sqrt_det = det.sqrt();
        let f = f12.truncate(order).abs() * sqrt_det;
        let sqrt_g = sqrt_det.recip();
        let v = (fns.v)(x, y);
        let vf = v / f;
        let scaled = [g11 / f, g12 / f, g22 / f];
        let f_over_det = f / det;
        let inverted = [g22 * f_over_det, -(g12 * f_over_det), g11 * f_over_det];
        let (g_up, g_down) = match reading {
            MetricReading::Contravariant => (scaled, inverted),
            MetricReading::Covariant => (inverted, scaled),
        };
        LocalGeometry { point: p, f12, f, sqrt_g, v, vf, g_up, g_down }
    }

    /// Scalar curvature (twice the Gaussian curvature) of the auxiliary
    /// metric; needs `order == 2`.
    pub fn scalar_curvature(&self) -> f64 {
        let [e, fm, g] = self.g_down;
        2.0 * brioschi(
            [e.value(), fm.value(), g.value()],
            [e.dx(), e.dy(), fm.dx(), fm.dy(), g.dx(), g.dy()],
            [e.dyy(), fm.dxy(), g.dxx()],
        )
    }

    /// `𝓛u` for a jet `u` of order 2 at the same point.
    pub fn laplace_beltrami(&self, u: Jet) -> f64 {
        let [e, fm, g] = self.g_down;
        let s = (e * g - fm * fm).sqrt();
        let ux = u.d_dx();
        let uy = u.d_dy();
        let [h11, h12, h22] = self.g_up;
        let flux_x = s * (h11 * ux + h12 * uy);
        let flux_y = s * (h12 * ux + h22 * uy);
        (flux_x.d_dx().value() + flux_y.d_dy().value()) / s.value()
    }

    /// `𝓛(V/F)` at this point.
    pub fn laplace_beltrami_vf(&self) -> f64 {
        self.laplace_beltrami(self.vf)
    }

    /// `ω₁ = ⅛κV²F⁻² − ¼(V/F)𝓛(V/F)`.
    pub fn omega1(&self) -> f64 {
        omega1_from(self.scalar_curvature(), self.vf.value(), self.laplace_beltrami_vf())
    }
}

pub(crate) fn omega1_from(curvature: f64, vf: f64, lb_vf: f64) -> f64 {
    0.125 * curvature * vf * vf - 0.25 * vf * lb_vf
}

/// Gaussian curvature of `E du² + 2F du dv + G dv²` by Brioschi's formula.
///
/// `first = [E_u, E_v, F_u, F_v, G_u, G_v]`, `second = [E_vv, F_uv, G_uu]`.
pub(crate) fn brioschi(metric: [f64; 3], first: [f64; 6], second: [f64; 3]) -> f64 {
    let [e, f, g] = metric;
    let [eu, ev, fu, fv, gu, gv] = first;
    let [evv, fuv, guu] = second;
    let m1 = [
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, g],
    ];
    let m2 = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]];
    let w = e * g - f * f;
    (det3(&m1) - det3(&m2)) / (w * w)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

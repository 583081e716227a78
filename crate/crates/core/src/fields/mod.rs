//! Coefficient fields of the magnetic Schrödinger operator and the geometric
//! quantities derived from them: the field intensity `F`, the area density
//! `√g`, the scalar curvature and Laplace–Beltrami operator of the metric
//! `F⁻¹g^{jk}`, and `ω₁`.
//!
//! Every operation runs either on jets of the analytic callbacks or on
//! fourth-order finite differences of the grid samples, selected by
//! [`DerivativeMode`]. `μ` and `h` never enter here.

mod coeffs;
mod grid;
pub mod jet;

use std::sync::Arc;

pub use coeffs::{
    CoefficientFns, CoefficientSamples, CoefficientSet, DerivativeMode, LocalGeometry, MetricReading,
};
pub(crate) use coeffs::{min_eigenvalue, omega1_from};
pub use grid::{diff_x, diff_y, field_fn, FieldFn, Grid2D, ScalarField};
pub use jet::Jet;

use crate::error::{Error, Result};

/// `F` together with the by-product `√g`.
#[derive(Clone, Debug)]
pub struct FieldIntensity {
    pub f: ScalarField,
    pub sqrt_g: ScalarField,
}

/// Field intensity `F = |F₁₂| g^{-1/2}` with `g = det(g^{jk})⁻¹`.
pub fn compute_f(coeffs: &CoefficientSet) -> Result<FieldIntensity> {
    let grid = coeffs.grid;
    let s = &coeffs.samples;
    for (i, j) in grid.nodes() {
        let k = grid.index(i, j);
        if !(min_eigenvalue(s.g11[k], s.g12[k], s.g22[k]) > 0.0) {
            return Err(Error::MetricNotPositive { i, j });
        }
    }
    match coeffs.derivatives {
        DerivativeMode::Analytic => {
            let f = analytic_field(coeffs, 2, |lg| lg.f)?;
            let sqrt_g = analytic_field(coeffs, 2, |lg| lg.sqrt_g)?;
            Ok(FieldIntensity { f, sqrt_g })
        }
        DerivativeMode::Stencil => {
            let st = StencilGeometry::new(coeffs);
            Ok(FieldIntensity {
                f: ScalarField::from_values(grid, st.f.clone())?,
                sqrt_g: ScalarField::from_values(grid, st.sqrt_g.clone())?,
            })
        }
    }
}

/// `V/F` sampled on the grid.
pub fn compute_vf(coeffs: &CoefficientSet) -> Result<ScalarField> {
    match coeffs.derivatives {
        DerivativeMode::Analytic => analytic_field(coeffs, 2, |lg| lg.vf),
        DerivativeMode::Stencil => {
            let st = StencilGeometry::new(coeffs);
            let vf = coeffs.samples.v.iter().zip(&st.f).map(|(v, f)| v / f).collect();
            ScalarField::from_values(coeffs.grid, vf)
        }
    }
}

/// Scalar curvature of the metric built from `F⁻¹g^{jk}`.
pub fn scalar_curvature(coeffs: &CoefficientSet) -> Result<ScalarField> {
    check_intensity(coeffs)?;
    match coeffs.derivatives {
        DerivativeMode::Analytic => analytic_scalar(coeffs, |lg| lg.scalar_curvature()),
        DerivativeMode::Stencil => {
            let st = StencilGeometry::new(coeffs);
            ScalarField::from_values(coeffs.grid, st.curvature())
        }
    }
}

/// `𝓛u = |G|^{-1/2} ∂_j(|G|^{1/2} G^{jk} ∂_k u)`.
///
/// In analytic mode `u` must carry a callback; otherwise its samples are
/// differentiated by stencils.
pub fn laplace_beltrami(coeffs: &CoefficientSet, u: &ScalarField) -> Result<ScalarField> {
    check_intensity(coeffs)?;
    if u.grid != coeffs.grid {
        return Err(Error::Validation("field and coefficients live on different grids".into()));
    }
    // callbacks that only return values cannot be differentiated
    let jet_capable = u.analytic.as_ref().filter(|uf| {
        let (x, y) = Jet::coords(u.grid.x(0), u.grid.y(0), 2);
        uf(x, y).order() >= 2
    });
    match (coeffs.derivatives, jet_capable) {
        (DerivativeMode::Analytic, Some(uf)) => {
            let fns = coeffs.fns.clone();
            let reading = coeffs.reading;
            let uf = uf.clone();
            let values = coeffs
                .grid
                .nodes()
                .map(|(i, j)| {
                    let p = coeffs.grid.point(i, j);
                    let lg = LocalGeometry::new(&fns, reading, p, 2);
                    let (x, y) = Jet::coords(p[0], p[1], 2);
                    lg.laplace_beltrami(uf(x, y))
                })
                .collect();
            ScalarField::from_values(coeffs.grid, values)
        }
        _ => {
            let st = StencilGeometry::new(coeffs);
            ScalarField::from_values(coeffs.grid, st.laplace_beltrami(&u.values))
        }
    }
}

/// `ω₁ = ⅛κV²F⁻² − ¼(V/F)𝓛(V/F)`, evaluated nodewise.
pub fn compute_omega1(coeffs: &CoefficientSet) -> Result<ScalarField> {
    check_intensity(coeffs)?;
    match coeffs.derivatives {
        DerivativeMode::Analytic => analytic_scalar(coeffs, |lg| lg.omega1()),
        DerivativeMode::Stencil => {
            let st = StencilGeometry::new(coeffs);
            let kappa = st.curvature();
            let vf: Vec<f64> = coeffs.samples.v.iter().zip(&st.f).map(|(v, f)| v / f).collect();
            let lb = st.laplace_beltrami(&vf);
            let w = kappa
                .iter()
                .zip(&vf)
                .zip(&lb)
                .map(|((&k, &q), &l)| omega1_from(k, q, l))
                .collect();
            ScalarField::from_values(coeffs.grid, w)
        }
    }
}

/// Smooth bump `exp(1 − 1/(1 − (r/R)^p))` centred at `center`, zero for `r ≥ R`.
pub fn bump(grid: Grid2D, center: [f64; 2], radius: f64, exponent: f64) -> Result<ScalarField> {
    if !(radius > 0.0 && exponent > 0.0) {
        return Err(Error::Validation("bump radius and exponent must be positive".into()));
    }
    let f: FieldFn = Arc::new(move |x: Jet, y: Jet| {
        let dx = x - center[0];
        let dy = y - center[1];
        let q = (dx * dx + dy * dy) / (radius * radius);
        if q.value() >= 1.0 {
            return Jet::constant(0.0, x.order());
        }
        let t = if exponent == 2.0 { q } else { q.powf(0.5 * exponent) };
        if t.value() == 0.0 && exponent < 2.0 {
            // the jet of q^{p/2} is singular at the centre for p < 2
            return Jet::constant(1.0, 0);
        }
        (1.0 - (1.0 - t).recip()).exp()
    });
    ScalarField::from_fn(grid, f)
}

fn check_intensity(coeffs: &CoefficientSet) -> Result<()> {
    let fi = compute_f(coeffs)?;
    for (i, j) in coeffs.grid.nodes() {
        let f = fi.f.at(i, j);
        if !(f >= coeffs.epsilon0) {
            return Err(Error::Validation(format!(
                "F ≥ ε₀ required, F = {f:.3e} at node ({i}, {j})"
            )));
        }
    }
    Ok(())
}

fn analytic_field(
    coeffs: &CoefficientSet,
    max_order: u8,
    pick: impl Fn(&LocalGeometry) -> Jet + Send + Sync + 'static,
) -> Result<ScalarField> {
    let fns = coeffs.fns.clone();
    let reading = coeffs.reading;
    let f: FieldFn = Arc::new(move |x: Jet, y: Jet| {
        let lg = LocalGeometry::new(&fns, reading, [x.value(), y.value()], x.order().min(max_order));
        pick(&lg)
    });
    ScalarField::from_fn(coeffs.grid, f)
}

fn analytic_scalar(coeffs: &CoefficientSet, eval: fn(&LocalGeometry) -> f64) -> Result<ScalarField> {
    let fns = coeffs.fns.clone();
    let reading = coeffs.reading;
    // value-only callback: derivatives of κ or ω₁ would need jets beyond order 3
    let f: FieldFn = Arc::new(move |x: Jet, y: Jet| {
        Jet::constant(eval(&LocalGeometry::new(&fns, reading, [x.value(), y.value()], 2)), 0)
    });
    ScalarField::from_fn(coeffs.grid, f)
}

/// Finite-difference counterpart of [`LocalGeometry`] over a whole grid.
struct StencilGeometry {
    grid: Grid2D,
    f: Vec<f64>,
    sqrt_g: Vec<f64>,
    g_up: [Vec<f64>; 3],
    g_down: [Vec<f64>; 3],
}

impl StencilGeometry {
    fn new(coeffs: &CoefficientSet) -> Self {
        let grid = coeffs.grid;
        let s = &coeffs.samples;
        let d2a1 = diff_y(&grid, &s.a1);
        let d1a2 = diff_x(&grid, &s.a2);
        let n = grid.len();
        let mut f = vec![0.0; n];
        let mut sqrt_g = vec![0.0; n];
        let mut g_up = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut g_down = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            let det = s.g11[k] * s.g22[k] - s.g12[k] * s.g12[k];
            let fk = (d1a2[k] - d2a1[k]).abs() * det.sqrt();
            f[k] = fk;
            sqrt_g[k] = 1.0 / det.sqrt();
            let scaled = [s.g11[k] / fk, s.g12[k] / fk, s.g22[k] / fk];
            let inverted = [s.g22[k] * fk / det, -s.g12[k] * fk / det, s.g11[k] * fk / det];
            let (up, down) = match coeffs.reading {
                MetricReading::Contravariant => (scaled, inverted),
                MetricReading::Covariant => (inverted, scaled),
            };
            for c in 0..3 {
                g_up[c][k] = up[c];
                g_down[c][k] = down[c];
            }
        }
        StencilGeometry { grid, f, sqrt_g, g_up, g_down }
    }

    fn curvature(&self) -> Vec<f64> {
        let g = &self.grid;
        let [e, fm, gg] = &self.g_down;
        let (eu, ev) = (diff_x(g, e), diff_y(g, e));
        let (fu, fv) = (diff_x(g, fm), diff_y(g, fm));
        let (gu, gv) = (diff_x(g, gg), diff_y(g, gg));
        let evv = diff_y(g, &ev);
        let fuv = diff_y(g, &fu);
        let guu = diff_x(g, &gu);
        (0..g.len())
            .map(|k| {
                2.0 * coeffs::brioschi(
                    [e[k], fm[k], gg[k]],
                    [eu[k], ev[k], fu[k], fv[k], gu[k], gv[k]],
                    [evv[k], fuv[k], guu[k]],
                )
            })
            .collect()
    }

    fn laplace_beltrami(&self, u: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let [e, fm, gg] = &self.g_down;
        let [h11, h12, h22] = &self.g_up;
        let ux = diff_x(g, u);
        let uy = diff_y(g, u);
        let n = g.len();
        let s: Vec<f64> = (0..n).map(|k| (e[k] * gg[k] - fm[k] * fm[k]).sqrt()).collect();
        let fx: Vec<f64> = (0..n).map(|k| s[k] * (h11[k] * ux[k] + h12[k] * uy[k])).collect();
        let fy: Vec<f64> = (0..n).map(|k| s[k] * (h12[k] * ux[k] + h22[k] * uy[k])).collect();
        let dfx = diff_x(g, &fx);
        let dfy = diff_y(g, &fy);
        (0..n).map(|k| (dfx[k] + dfy[k]) / s[k]).collect()
    }
}

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::error::{Error, Result};

/// Analytic field callback evaluated on coordinate jets.
///
/// Callbacks receive `Jet::var_x(x0, m)` / `Jet::var_y(y0, m)` and return a
/// jet of order `m` (or lower), so one closure provides the value and its
/// derivatives.
pub type FieldFn = Arc<dyn Fn(Jet, Jet) -> Jet + Send + Sync>;

/// Wraps a closure as a [`FieldFn`].
pub fn field_fn(f: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static) -> FieldFn {
    Arc::new(f)
}

/// Uniform node grid on an axis-aligned rectangle, boundary nodes included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::GridTooCoarse { nx, ny });
        }
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::Validation("grid bounds must be increasing".into()));
        }
        let g = Grid2D { nx, ny, x_min, x_max, y_min, y_max };
        let ay = (y_max - y_min) / (ny - 1) as f64;
        if (g.spacing() - ay).abs() > 1e-12 * g.spacing() {
            return Err(Error::Validation(format!(
                "grid spacing differs between axes ({} vs {ay})",
                g.spacing()
            )));
        }
        Ok(g)
    }

    /// Square grid `[lo, hi]²` with `n` nodes per axis.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Grid2D::new(n, n, lo, hi, lo, hi)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.spacing()
        }
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x(i), self.y(j)]
    }

    /// Row-major (x fastest) node index.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn is_interior_point(&self, p: [f64; 2]) -> bool {
        p[0] > self.x_min && p[0] < self.x_max && p[1] > self.y_min && p[1] < self.y_max
    }

    pub fn is_boundary_node(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }
}

/// Real field sampled on a grid, optionally backed by an analytic callback.
#[derive(Clone)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub analytic: Option<FieldFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite field value at node ({}, {})",
                k % grid.nx,
                k / grid.nx
            )));
        }
        Ok(ScalarField { grid, values, analytic: None })
    }

    /// Samples an analytic callback at every node and keeps it.
    pub fn from_fn(grid: Grid2D, f: FieldFn) -> Result<Self> {
        let values = grid
            .nodes()
            .map(|(i, j)| {
                let (x, y) = Jet::coords(grid.x(i), grid.y(j), 0);
                f(x, y).value()
            })
            .collect();
        let mut field = ScalarField::from_values(grid, values)?;
        field.analytic = Some(f);
        Ok(field)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
            analytic: Some(field_fn(move |x, _| Jet::constant(c, x.order()))),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Evaluates at an arbitrary point: callback when present, else bilinear
    /// interpolation of the samples.
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        if let Some(f) = &self.analytic {
            let (x, y) = Jet::coords(p[0], p[1], 0);
            return f(x, y).value();
        }
        self.interpolate(p)
    }

    pub fn interpolate(&self, p: [f64; 2]) -> f64 {
        let g = &self.grid;
        let a = g.spacing();
        let fx = ((p[0] - g.x_min) / a).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p[1] - g.y_min) / a).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        (1.0 - tx) * (1.0 - ty) * self.at(i, j)
            + tx * (1.0 - ty) * self.at(i + 1, j)
            + (1.0 - tx) * ty * self.at(i, j + 1)
            + tx * ty * self.at(i + 1, j + 1)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            analytic: None,
        }
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        let analytic = self.analytic.clone().map(|f| field_fn(move |x, y| f(x, y) * c));
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v * c).collect(), analytic }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when every sample on the outermost ring of nodes is zero.
    pub fn vanishes_on_boundary(&self) -> bool {
        self.grid
            .nodes()
            .filter(|&(i, j)| self.grid.is_boundary_node(i, j))
            .all(|(i, j)| self.at(i, j) == 0.0)
    }
}

/// Fourth-order first derivative along x of nodal samples, one-sided at the ends.
pub fn diff_x(grid: &Grid2D, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for j in 0..grid.ny {
        let row: Vec<f64> = (0..grid.nx).map(|i| v[grid.index(i, j)]).collect();
        let d = diff_1d(&row, grid.spacing());
        for i in 0..grid.nx {
            out[grid.index(i, j)] = d[i];
        }
    }
    out
}

/// Fourth-order first derivative along y.
pub fn diff_y(grid: &Grid2D, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in 0..grid.nx {
        let col: Vec<f64> = (0..grid.ny).map(|j| v[grid.index(i, j)]).collect();
        let d = diff_1d(&col, grid.spacing());
        for j in 0..grid.ny {
            out[grid.index(i, j)] = d[j];
        }
    }
    out
}

fn diff_1d(f: &[f64], a: f64) -> Vec<f64> {
    let n = f.len();
    let s = 1.0 / (12.0 * a);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    d[n - 1] = -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4]
        - 3.0 * f[n - 5])
        * s;
    d[n - 2] = -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]) * s;
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_and_anisotropic_grids() {
        assert!(matches!(Grid2D::square(7, -1.0, 1.0), Err(Error::GridTooCoarse { .. })));
        assert!(Grid2D::new(9, 9, -1.0, 1.0, -1.0, 2.0).is_err());
        let g = Grid2D::square(9, -1.0, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.x(8), 1.0);
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        let g = Grid2D::square(11, -1.0, 1.0).unwrap();
        let v: Vec<f64> = g
            .nodes()
            .map(|(i, j)| {
                let [x, y] = g.point(i, j);
                x.powi(4) - 2.0 * x * x * y + y.powi(3)
            })
            .collect();
        let dx = diff_x(&g, &v);
        let dy = diff_y(&g, &v);
        for (i, j) in g.nodes() {
            let [x, y] = g.point(i, j);
            let k = g.index(i, j);
            assert!((dx[k] - (4.0 * x.powi(3) - 4.0 * x * y)).abs() < 1e-11);
            assert!((dy[k] - (-2.0 * x * x + 3.0 * y * y)).abs() < 1e-11);
        }
    }

    #[test]
    fn callback_and_samples_agree() {
        let g = Grid2D::square(17, -1.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, field_fn(|x, y| x * y + (x * 0.5).sin())).unwrap();
        for (i, j) in g.nodes() {
            assert!((f.eval(g.point(i, j)) - f.at(i, j)).abs() <= 1e-12);
        }
        let plain = ScalarField::from_values(g, f.values.clone()).unwrap();
        assert!((plain.eval([0.1, 0.2]) - (0.02 + 0.05f64.sin())).abs() < 1e-2);
    }
}

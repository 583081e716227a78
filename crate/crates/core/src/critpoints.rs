//! Critical points of `V/F`: sign-change seeding on the coefficient grid,
//! Newton refinement on analytic jets, classification by the Hessian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::CoefficientSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritOptions {
    pub newton_tol: f64,
    pub nondeg_tol: f64,
    pub dedup_radius: f64,
    pub max_iter: usize,
}

impl Default for CritOptions {
    fn default() -> Self {
        CritOptions { newton_tol: 1e-10, nondeg_tol: 1e-6, dedup_radius: 1e-4, max_iter: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
    /// Returned by [`hessian_data`] away from a critical point.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: [f64; 2],
    pub kind: CriticalKind,
    /// Hessian of `V/F`.
    pub hessian: [[f64; 2]; 2],
    pub det_hessian: f64,
    /// `|det Hess(V/F)|^{1/2}`.
    pub k: f64,
    pub gradient_norm: f64,
    pub vf_value: f64,
    pub omega1_value: f64,
    pub sqrt_g_value: f64,
    pub f_value: f64,
    pub v_value: f64,
    pub curvature_value: f64,
    /// `𝓛(V/F)` at the point.
    pub lb_vf_value: f64,
    /// Within `dedup_radius` of the search boundary; excluded from
    /// correction sums.
    pub boundary_unreliable: bool,
}

impl CriticalPoint {
    pub fn is_saddle(&self) -> bool {
        self.kind == CriticalKind::Saddle
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    /// Seeds whose Newton run did not converge.
    pub warnings: Vec<String>,
}

impl CriticalSearch {
    /// Saddles that may enter correction sums.
    pub fn reliable_saddles(&self) -> Vec<CriticalPoint> {
        self.points.iter().filter(|p| p.is_saddle() && !p.boundary_unreliable).cloned().collect()
    }
}

pub fn find_critical_points(coeffs: &CoefficientSet, search_radius: f64) -> Result<CriticalSearch> {
    find_critical_points_with(coeffs, search_radius, &CritOptions::default())
}

pub fn find_critical_points_with(
    coeffs: &CoefficientSet,
    search_radius: f64,
    opts: &CritOptions,
) -> Result<CriticalSearch> {
    if !(search_radius > 0.0 && search_radius <= 1.0) {
        return Err(Error::Validation(format!("search radius must lie in (0, 1], got {search_radius}")));
    }
    let grid = coeffs.grid;
    let grads: Vec<[f64; 2]> = grid
        .nodes()
        .map(|(i, j)| {
            let g = coeffs.local(grid.point(i, j), 1).vf.gradient();
            [g[0], g[1]]
        })
        .collect();
    let a = grid.spacing();
    let mut search = CriticalSearch::default();
    let mut found: Vec<[f64; 2]> = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let changes = |c: usize| {
                let s: Vec<bool> = corners.iter().map(|&(p, q)| grads[grid.index(p, q)][c] >= 0.0).collect();
                s.iter().any(|&b| b) && s.iter().any(|&b| !b)
            };
            if !(changes(0) && changes(1)) {
                continue;
            }
            let center = [grid.x(i) + 0.5 * a, grid.y(j) + 0.5 * a];
            // cells entirely outside the search disc cannot contain a point of it
            if center[0].hypot(center[1]) > search_radius + a {
                continue;
            }
            match newton(coeffs, center, opts) {
                Some((p, _)) => {
                    if p[0].hypot(p[1]) <= search_radius {
                        found.push(p);
                    }
                }
                None => search.warnings.push(format!(
                    "Newton run from seed ({:.4}, {:.4}) did not converge in {} iterations",
                    center[0], center[1], opts.max_iter
                )),
            }
        }
    }
    found.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    let mut merged: Vec<[f64; 2]> = Vec::new();
    for p in found {
        if !merged.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) < 2.0 * opts.dedup_radius) {
            merged.push(p);
        }
    }
    for p in merged {
        let mut cp = point_data(coeffs, p, opts);
        if cp.det_hessian.abs() < opts.nondeg_tol {
            return Err(Error::DegenerateCriticalPoint { x: p[0], y: p[1], det: cp.det_hessian.abs() });
        }
        cp.boundary_unreliable = p[0].hypot(p[1]) > search_radius - opts.dedup_radius;
        search.points.push(cp);
    }
    Ok(search)
}

/// Newton iteration for `∇(V/F) = 0`; returns the point and iteration count.
pub fn newton(coeffs: &CoefficientSet, seed: [f64; 2], opts: &CritOptions) -> Option<([f64; 2], usize)> {
    let mut p = seed;
    for it in 0..=opts.max_iter {
        let vf = coeffs.local(p, 2).vf;
        let g = vf.gradient();
        if !(g[0].is_finite() && g[1].is_finite()) {
            return None;
        }
        if g[0].hypot(g[1]) <= opts.newton_tol {
            return Some((p, it));
        }
        if it == opts.max_iter {
            break;
        }
        let h = vf.hessian();
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        p[0] -= (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        p[1] -= (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        if !coeffs.grid.is_interior_point(p) {
            return None;
        }
    }
    None
}

/// Fills every [`CriticalPoint`] field at `location` without any Newton step.
pub fn hessian_data(coeffs: &CoefficientSet, location: [f64; 2]) -> Result<CriticalPoint> {
    if !coeffs.grid.is_interior_point(location) {
        return Err(Error::Validation(format!(
            "location ({}, {}) is not inside the grid interior",
            location[0], location[1]
        )));
    }
    Ok(point_data(coeffs, location, &CritOptions::default()))
}

fn point_data(coeffs: &CoefficientSet, p: [f64; 2], opts: &CritOptions) -> CriticalPoint {
    let lg = coeffs.local(p, 2);
    let g = lg.vf.gradient();
    let h = lg.vf.hessian();
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let gradient_norm = g[0].hypot(g[1]);
    let kind = if gradient_norm > opts.newton_tol {
        CriticalKind::None
    } else {
        classify(h)
    };
    CriticalPoint {
        location: p,
        kind,
        hessian: h,
        det_hessian: det,
        k: det.abs().sqrt(),
        gradient_norm,
        vf_value: lg.vf.value(),
        omega1_value: lg.omega1(),
        sqrt_g_value: lg.sqrt_g.value(),
        f_value: lg.f.value(),
        v_value: lg.v.value(),
        curvature_value: lg.scalar_curvature(),
        lb_vf_value: lg.laplace_beltrami_vf(),
        boundary_unreliable: false,
    }
}

/// Kind of a non-degenerate critical point from its Hessian.
pub fn classify(h: [[f64; 2]; 2]) -> CriticalKind {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det < 0.0 {
        CriticalKind::Saddle
    } else if h[0][0] + h[1][1] > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Maximum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{field_fn, FieldFn, Grid2D, Jet};

    fn flat(v: FieldFn) -> CoefficientSet {
        CoefficientSet::euclidean(
            Grid2D::square(41, -1.0, 1.0).unwrap(),
            field_fn(|_, y| y * -0.5),
            field_fn(|x, _| x * 0.5),
            v,
            1e-3,
        )
        .unwrap()
    }

    #[test]
    fn saddle_and_minimum_examples() {
        let s = find_critical_points(&flat(field_fn(|x, y| x * y + 1.0)), 1.0).unwrap();
        assert_eq!(s.points.len(), 1);
        let p = &s.points[0];
        assert_eq!(p.kind, CriticalKind::Saddle);
        assert!(p.location[0].abs() < 1e-12 && p.location[1].abs() < 1e-12);
        assert!((p.det_hessian + 1.0).abs() < 1e-12);
        assert!((p.k - 1.0).abs() < 1e-12);

        let s = find_critical_points(&flat(field_fn(|x, y| x * x + y * y + 1.0)), 1.0).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].kind, CriticalKind::Minimum);
        assert!((s.points[0].k - 2.0).abs() < 1e-12);

        for r in [0.3, 0.7, 1.0] {
            let s = find_critical_points(&flat(field_fn(|x, _| x + 1.0)), r).unwrap();
            assert!(s.points.is_empty());
        }
    }

    #[test]
    fn hessian_data_examples() {
        let cp = hessian_data(&flat(field_fn(|x, y| x * x - 2.0 * y * y + 1.0)), [0.0, 0.0]).unwrap();
        assert!((cp.det_hessian + 8.0).abs() < 1e-12);
        assert!((cp.k - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(cp.kind, CriticalKind::Saddle);

        // V ≡ 1 with F = 1 + r²: A = (−y, x)(1/2 + r²/4)
        let set = CoefficientSet::euclidean(
            Grid2D::square(41, -1.0, 1.0).unwrap(),
            field_fn(|x, y| -y * ((x * x + y * y) * 0.25 + 0.5)),
            field_fn(|x, y| x * ((x * x + y * y) * 0.25 + 0.5)),
            field_fn(|x, _| Jet::constant(1.0, x.order())),
            1e-3,
        )
        .unwrap();
        let cp = hessian_data(&set, [0.0, 0.0]).unwrap();
        assert_eq!(cp.kind, CriticalKind::Maximum);
        for (r, row) in cp.hessian.iter().enumerate() {
            for (c, h) in row.iter().enumerate() {
                let want = if r == c { -2.0 } else { 0.0 };
                assert!((h - want).abs() < 1e-12);
            }
        }
        assert!((cp.k - 2.0).abs() < 1e-12);

        let cp = hessian_data(&flat(field_fn(|x, y| x * y + 1.0)), [0.3, 0.0]).unwrap();
        assert_eq!(cp.kind, CriticalKind::None);
        assert!((cp.gradient_norm - 0.3).abs() < 1e-12);

        assert!(hessian_data(&flat(field_fn(|x, y| x * y + 1.0)), [1.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_points_are_rejected() {
        let err = find_critical_points(&flat(field_fn(|x, y| x * x * x * x * 0.01 + y * y + 1.0)), 1.0);
        assert!(matches!(err, Err(Error::DegenerateCriticalPoint { .. })), "{err:?}");
    }

    #[test]
    fn points_near_the_search_boundary_are_flagged() {
        let c = 0.6;
        let set = flat(field_fn(move |x, y| (x - c) * y + 1.0));
        let s = find_critical_points(&set, c + 5e-5).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(s.points[0].boundary_unreliable);
        assert!(s.reliable_saddles().is_empty());
        let s = find_critical_points(&set, 0.9).unwrap();
        assert!(!s.points[0].boundary_unreliable);
    }
}

//! Gauge-covariant finite-difference discretization of the magnetic
//! Schrödinger operator on a square with Dirichlet truncation, its dense
//! eigendecomposition, and the localized spectral counting functional.
//!
//! The kinetic form `½ Σ conj(P_j u) g^{jk} P_k u` is assembled edge by edge.
//! Diagonal metric terms use high-order (default eighth) staggered covariant
//! differences at edge midpoints; the `g^{12}` cross term uses second-order differences at
//! plaquette centres. Nodes entering a difference are first parallel
//! transported to the evaluation point with the Peierls factor
//! `exp(−i(μ/h)∫A·dl)` (midpoint rule), so the form is gauge covariant and
//! Hermitian by construction.

mod cache;

use std::collections::BTreeMap;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use cache::{cache_key, read_laev, write_laev};

use crate::error::{Error, Result};
use crate::fields::{field_fn, CoefficientFns, CoefficientSet, FieldFn, Grid2D, Jet, MetricReading, ScalarField};

/// Resolution guards and the dense-size cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Upper bound on `μ F_max a²/h`.
    pub max_flux: f64,
    /// Lower bound on `√(h/(μF_max)) / a`.
    pub min_length_ratio: f64,
    pub max_dense: usize,
    /// Accuracy order of the staggered differences: 2, 4, 6 or 8.
    pub stencil_order: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { max_flux: 0.3, min_length_ratio: 1.8, max_dense: 4500, stencil_order: 8 }
    }
}

/// Weights `c_m` of `u'(x) ≈ Σ_m c_m (u(x + (m+½)a) − u(x − (m+½)a)) / a`.
fn staggered_weights(order: usize) -> Result<&'static [f64]> {
    Ok(match order {
        2 => &[1.0],
        4 => &[9.0 / 8.0, -1.0 / 24.0],
        6 => &[75.0 / 64.0, -25.0 / 384.0, 3.0 / 640.0],
        8 => &[1225.0 / 1024.0, -245.0 / 3072.0, 49.0 / 5120.0, -5.0 / 7168.0],
        _ => return Err(Error::Validation(format!("stencil order must be 2, 4, 6 or 8, got {order}"))),
    })
}

/// Measured resolution of an assembled operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardMargins {
    pub flux_per_plaquette: f64,
    pub magnetic_length_ratio: f64,
    pub f_max: f64,
}

/// Hermitian matrix of the discretized operator in the interior unknowns,
/// stored by rows with sorted column indices.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub grid: Grid2D,
    pub mu: f64,
    pub h: f64,
    rows: Vec<Vec<(usize, C64)>>,
    /// `exp(−i(μ/h) a A·e)` on every nearest-neighbour edge, x-edges first.
    pub link_phases: Vec<C64>,
    pub guards: GuardMargins,
}

/// Oracle grid with `interior` unknowns per axis on `[lo, hi]²`; the
/// outermost ring of nodes carries the Dirichlet condition.
pub fn oracle_grid(interior: usize, lo: f64, hi: f64) -> Result<Grid2D> {
    Grid2D::square(interior + 2, lo, hi)
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Unknown index of grid node `(i, j)`, if it is interior.
    pub fn unknown(&self, i: usize, j: usize) -> Option<usize> {
        unknown_index(&self.grid, i as isize, j as isize)
    }

    /// Grid node of unknown `k`.
    pub fn node(&self, k: usize) -> (usize, usize) {
        let m = self.grid.nx - 2;
        (k % m + 1, k / m + 1)
    }

    pub fn row(&self, r: usize) -> &[(usize, C64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, s: usize) -> C64 {
        match self.rows[r].binary_search_by_key(&s, |e| e.0) {
            Ok(k) => self.rows[r][k].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `max |A_rs − conj(A_sr)|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, row) in self.rows.iter().enumerate() {
            for &(s, v) in row {
                worst = worst.max((v - self.get(s, r).conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|row| row.iter().map(|&(s, v)| v * u[s]).sum()).collect()
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.rows.iter().map(|row| row.iter().map(|e| e.1.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut buf = vec![C64::new(0.0, 0.0); n * n];
        for (r, row) in self.rows.iter().enumerate() {
            for &(s, v) in row {
                buf[r * n + s] = v;
            }
        }
        Mat::from_fn(n, n, |i, j| buf[i * n + j])
    }
}

fn unknown_index(grid: &Grid2D, i: isize, j: isize) -> Option<usize> {
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    if i < 1 || j < 1 || i > nx - 2 || j > ny - 2 {
        return None;
    }
    Some(((j - 1) * (nx - 2) + (i - 1)) as usize)
}

/// Contravariant metric `[g¹¹, g¹², g²²]` at a point.
fn contravariant_metric(fns: &CoefficientFns, reading: MetricReading, p: [f64; 2]) -> [f64; 3] {
    let (x, y) = Jet::coords(p[0], p[1], 0);
    let g = [(fns.g11)(x, y).value(), (fns.g12)(x, y).value(), (fns.g22)(x, y).value()];
    match reading {
        MetricReading::Contravariant => g,
        MetricReading::Covariant => {
            let det = g[0] * g[2] - g[1] * g[1];
            [g[2] / det, -g[1] / det, g[0] / det]
        }
    }
}

fn vector_potential(fns: &CoefficientFns, p: [f64; 2]) -> [f64; 2] {
    let (x, y) = Jet::coords(p[0], p[1], 0);
    [(fns.a1)(x, y).value(), (fns.a2)(x, y).value()]
}

pub fn assemble(coeffs: &CoefficientSet, grid: Grid2D, mu: f64, h: f64) -> Result<DiscreteOperator> {
    assemble_with(coeffs, grid, mu, h, &OracleOptions::default())
}

pub fn assemble_with(
    coeffs: &CoefficientSet,
    grid: Grid2D,
    mu: f64,
    h: f64,
    opts: &OracleOptions,
) -> Result<DiscreteOperator> {
    if !(mu >= 0.0 && h > 0.0) {
        return Err(Error::Validation(format!("oracle needs mu >= 0 and h > 0, got mu = {mu}, h = {h}")));
    }
    let guards = check_guards(coeffs, &grid, mu, h, opts)?;
    let fns = &*coeffs.fns;
    let reading = coeffs.reading;
    let a = grid.spacing();
    let n = (grid.nx - 2) * (grid.ny - 2);
    let pref = 0.5 * h * h;
    let q = mu / h;
    let mut upper: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
    let mut add_form = |weight: f64, left: &[(usize, C64)], right: &[(usize, C64)]| {
        // weight · conj(left·u)(right·u), upper triangle only
        for &(r, cr) in left {
            for &(s, cs) in right {
                if r <= s {
                    *upper[r].entry(s).or_insert(C64::new(0.0, 0.0)) += cr.conj() * cs * weight;
                }
            }
        }
    };
    let mut link_phases = Vec::new();
    let transport = |from: [f64; 2], to: [f64; 2]| {
        // exp(−i(μ/h)∫_from^to A·dl), midpoint rule
        let mid = [0.5 * (from[0] + to[0]), 0.5 * (from[1] + to[1])];
        let av = vector_potential(fns, mid);
        let phase = -q * (av[0] * (to[0] - from[0]) + av[1] * (to[1] - from[1]));
        C64::from_polar(1.0, phase)
    };
    let weights = staggered_weights(opts.stencil_order)?;
    // node offsets from the lower end of the edge and their weights
    let taps: Vec<(isize, f64)> = weights
        .iter()
        .enumerate()
        .flat_map(|(m, &c)| [(m as isize + 1, c / a), (-(m as isize), -c / a)])
        .collect();

    for axis in 0..2 {
        let (ni, nj) = if axis == 0 { (grid.nx - 1, grid.ny) } else { (grid.nx, grid.ny - 1) };
        for j in 0..nj {
            for i in 0..ni {
                let (i, j) = (i as isize, j as isize);
                let step = if axis == 0 { (1isize, 0isize) } else { (0, 1) };
                let p0 = grid.point(i as usize, j as usize);
                let p1 = grid.point((i + step.0) as usize, (j + step.1) as usize);
                let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
                link_phases.push(transport(p0, p1));
                let mut stencil = Vec::with_capacity(taps.len());
                for &(off, w) in &taps {
                    let (mut qi, mut qj) = (i + off * step.0, j + off * step.1);
                    let mut w = w;
                    // ghost nodes past the boundary: odd reflection of the
                    // transported values about the boundary node
                    let last = if axis == 0 { grid.nx as isize - 1 } else { grid.ny as isize - 1 };
                    let along = if axis == 0 { &mut qi } else { &mut qj };
                    if *along < 0 {
                        *along = -*along;
                        w = -w;
                    } else if *along > last {
                        *along = 2 * last - *along;
                        w = -w;
                    }
                    if let Some(u) = unknown_index(&grid, qi, qj) {
                        let pq = grid.point(qi as usize, qj as usize);
                        stencil.push((u, transport(mid, pq) * w));
                    }
                }
                if stencil.is_empty() {
                    continue;
                }
                let g = contravariant_metric(fns, reading, mid);
                let gd = if axis == 0 { g[0] } else { g[2] };
                add_form(pref * gd, &stencil, &stencil);
            }
        }
    }

    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let p00 = grid.point(i, j);
            let centre = [p00[0] + 0.5 * a, p00[1] + 0.5 * a];
            let g = contravariant_metric(fns, reading, centre);
            if g[1] == 0.0 {
                continue;
            }
            let corners = [(0, 0, -1.0, -1.0), (1, 0, 1.0, -1.0), (0, 1, -1.0, 1.0), (1, 1, 1.0, 1.0)];
            let mut d1 = Vec::with_capacity(4);
            let mut d2 = Vec::with_capacity(4);
            for (di, dj, s1, s2) in corners {
                let (ci, cj) = (i + di, j + dj);
                if let Some(u) = unknown_index(&grid, ci as isize, cj as isize) {
                    let t = transport(centre, grid.point(ci, cj));
                    d1.push((u, t * (s1 / (2.0 * a))));
                    d2.push((u, t * (s2 / (2.0 * a))));
                }
            }
            add_form(pref * g[1], &d1, &d2);
            add_form(pref * g[1], &d2, &d1);
        }
    }

    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let r = unknown_index(&grid, i as isize, j as isize).unwrap();
            let (x, y) = Jet::coords(grid.x(i), grid.y(j), 0);
            let v = (fns.v)(x, y).value();
            *upper[r].entry(r).or_insert(C64::new(0.0, 0.0)) += C64::new(-0.5 * v, 0.0);
        }
    }

    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    for (r, entries) in upper.iter().enumerate() {
        for (&s, &v) in entries {
            if r == s {
                rows[r].push((s, C64::new(v.re, 0.0)));
            } else {
                rows[r].push((s, v));
                rows[s].push((r, v.conj()));
            }
        }
    }
    for row in &mut rows {
        row.sort_by_key(|e| e.0);
    }
    Ok(DiscreteOperator { grid, mu, h, rows, link_phases, guards })
}

fn check_guards(coeffs: &CoefficientSet, grid: &Grid2D, mu: f64, h: f64, opts: &OracleOptions) -> Result<GuardMargins> {
    let a = grid.spacing();
    let f_max = grid
        .nodes()
        .map(|(i, j)| coeffs.local(grid.point(i, j), 0).f.value())
        .fold(0.0, f64::max);
    let flux = mu * f_max * a * a / h;
    let length = if mu * f_max > 0.0 { (h / (mu * f_max)).sqrt() } else { f64::INFINITY };
    let ratio = length / a;
    let side = grid.x_max - grid.x_min;
    let interior_for = |a_max: f64| ((side / a_max).ceil() as usize).saturating_sub(1);
    if flux > opts.max_flux {
        let need = interior_for((opts.max_flux * h / (mu * f_max)).sqrt());
        return Err(Error::Guard(format!(
            "flux per plaquette mu*F_max*a^2/h = {flux:.4} exceeds {}; need at least {need} interior nodes per axis",
            opts.max_flux
        )));
    }
    if ratio < opts.min_length_ratio {
        let need = interior_for(length / opts.min_length_ratio);
        return Err(Error::Guard(format!(
            "magnetic length sqrt(h/(mu*F_max)) = {length:.4} is {ratio:.3} grid steps, below {}; need at least {need} interior nodes per axis",
            opts.min_length_ratio
        )));
    }
    let n = (grid.nx - 2) * (grid.ny - 2);
    if n > opts.max_dense {
        return Err(Error::Validation(format!(
            "{n} unknowns exceed the dense eigensolver limit {}; use at most {} interior nodes per axis",
            opts.max_dense,
            (opts.max_dense as f64).sqrt().floor()
        )));
    }
    Ok(GuardMargins { flux_per_plaquette: flux, magnetic_length_ratio: ratio, f_max })
}

/// Eigenpairs with vectors normalized in `⟨u, v⟩ = Σ a² conj(u)v`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub grid: Grid2D,
    pub eigenvalues: Vec<f64>,
    /// Column `k` is `u_k` at the interior unknowns.
    pub vectors: Mat<C64>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `Σ_i ψ(x_i)|u_k(x_i)|² a²` for every eigenpair.
    pub fn weights(&self, psi: &ScalarField) -> Vec<f64> {
        let samples = psi_at_unknowns(&self.grid, psi);
        let a2 = self.grid.spacing().powi(2);
        (0..self.len())
            .map(|k| {
                let col = self.vectors.col(k);
                samples.iter().enumerate().map(|(i, s)| s * col[i].norm_sqr()).sum::<f64>() * a2
            })
            .collect()
    }
}

fn psi_at_unknowns(grid: &Grid2D, psi: &ScalarField) -> Vec<f64> {
    let m = grid.nx - 2;
    let n = m * (grid.ny - 2);
    (0..n)
        .map(|k| {
            let (i, j) = (k % m + 1, k / m + 1);
            if psi.grid == *grid { psi.at(i, j) } else { psi.eval(grid.point(i, j)) }
        })
        .collect()
}

fn dense_guard(n: usize) -> Result<()> {
    let cap = OracleOptions::default().max_dense;
    if n > cap {
        return Err(Error::Validation(format!("{n} unknowns exceed the dense eigensolver limit {cap}")));
    }
    Ok(())
}

pub fn eigensolve(op: &DiscreteOperator) -> Result<SpectralData> {
    dense_guard(op.dim())?;
    let (eigenvalues, vectors) = dense_eigen(&op.to_dense())?;
    let inv_a = 1.0 / op.grid.spacing();
    let vectors = Mat::from_fn(vectors.nrows(), vectors.ncols(), |i, k| vectors[(i, k)] * inv_a);
    Ok(SpectralData { grid: op.grid, eigenvalues, vectors })
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix
/// (only the lower triangle is read).
pub fn dense_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    // faer reports non-convergence without a block index
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenConvergence { block: 0 })?;
    let s = evd.S().column_vector();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].re.total_cmp(&s[j].re));
    let u = evd.U();
    let values = order.iter().map(|&k| s[k].re).collect();
    Ok((values, Mat::from_fn(n, n, |i, k| u[(i, order[k])])))
}

/// Sorted eigenvalues of a Hermitian matrix (lower triangle read).
pub fn dense_eigenvalues(m: &Mat<C64>) -> Result<Vec<f64>> {
    let mut ev = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenConvergence { block: 0 })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Sorted eigenvalues without eigenvectors.
pub fn eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    dense_guard(op.dim())?;
    dense_eigenvalues(&op.to_dense())
}

/// `Σ_{λ_k ≤ τ} Σ_i ψ(x_i)|u_k(x_i)|² a²`.
pub fn spectral_count(sd: &SpectralData, psi: &ScalarField, tau: f64) -> f64 {
    let kmax = sd.eigenvalues.partition_point(|&l| l <= tau);
    if kmax == 0 {
        return 0.0;
    }
    let samples = psi_at_unknowns(&sd.grid, psi);
    let a2 = sd.grid.spacing().powi(2);
    let mut total = 0.0;
    for k in 0..kmax {
        let col = sd.vectors.col(k);
        total += samples.iter().enumerate().map(|(i, s)| s * col[i].norm_sqr()).sum::<f64>();
    }
    total * a2
}

/// Coefficient set with `A` replaced by `A + ∇χ`.
///
/// Jets of the shifted potential lose one order at the top when the caller
/// asks for third derivatives; the oracle only needs values.
pub fn gauge_shifted(coeffs: &CoefficientSet, chi: FieldFn) -> Result<CoefficientSet> {
    let fns = &*coeffs.fns;
    let shift = |base: FieldFn, chi: FieldFn, axis: usize| {
        field_fn(move |x: Jet, y: Jet| {
            let k = (x.order() + 1).min(3);
            let (cx, cy) = Jet::coords(x.value(), y.value(), k);
            let c = chi(cx, cy);
            let d = if axis == 0 { c.d_dx() } else { c.d_dy() };
            base(x, y) + d
        })
    };
    let shifted = CoefficientFns {
        g11: fns.g11.clone(),
        g12: fns.g12.clone(),
        g22: fns.g22.clone(),
        a1: shift(fns.a1.clone(), chi.clone(), 0),
        a2: shift(fns.a2.clone(), chi, 1),
        v: fns.v.clone(),
    };
    Ok(CoefficientSet::new(coeffs.grid, shifted, coeffs.epsilon0)?
        .with_reading(coeffs.reading)
        .with_derivatives(coeffs.derivatives))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    /// `max_k |λ_k(A) − λ_k(A + ∇χ)| / max_k |λ_k(A)|`.
    pub deviation: f64,
    pub max_abs_eigenvalue: f64,
}

pub fn gauge_check(coeffs: &CoefficientSet, grid: Grid2D, mu: f64, h: f64, chi: &ScalarField) -> Result<GaugeReport> {
    let chi_fn = chi
        .analytic
        .clone()
        .ok_or_else(|| Error::Validation("gauge check needs an analytic chi".into()))?;
    let base = eigenvalues(&assemble(coeffs, grid, mu, h)?)?;
    let shifted = eigenvalues(&assemble(&gauge_shifted(coeffs, chi_fn)?, grid, mu, h)?)?;
    let scale = base.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let diff = base.iter().zip(&shifted).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(GaugeReport { deviation: diff / scale, max_abs_eigenvalue: scale })
}

#[cfg(test)]
mod tests;

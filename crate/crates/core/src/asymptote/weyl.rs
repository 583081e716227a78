use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{CoefficientSet, ScalarField};
use crate::quadrature::{adaptive_gk, bisect, simpson_2d, GaussRule};

/// Number of Landau levels `n ≥ 0` with `(2n+1)μhF ≤ V + 2τ`.
pub fn level_count(v: f64, f: f64, tau: f64, mu: f64, h: f64) -> u64 {
    let step = mu * h * f;
    let top = v + 2.0 * tau;
    if !(step > 0.0) || !(top >= step) {
        return 0;
    }
    let mut n = (((top / step) - 1.0) * 0.5).floor().max(0.0) as u64;
    while ((2 * n + 3) as f64) * step <= top {
        n += 1;
    }
    while n > 0 && ((2 * n + 1) as f64) * step > top {
        n -= 1;
    }
    if (2 * n + 1) as f64 * step > top {
        0
    } else {
        n + 1
    }
}

/// `(2π)⁻¹ μh⁻¹ F√g · #{n ≥ 0 : (2n+1)μhF ≤ V + 2τ}` at `x`.
pub fn magnetic_weyl_density(coeffs: &CoefficientSet, x: [f64; 2], tau: f64, mu: f64, h: f64) -> f64 {
    let lg = coeffs.local(x, 0);
    let (f, sqrt_g, v) = (lg.f.value(), lg.sqrt_g.value(), lg.v.value());
    density_prefactor(mu, h) * f * sqrt_g * level_count(v, f, tau, mu, h) as f64
}

fn density_prefactor(mu: f64, h: f64) -> f64 {
    mu / (2.0 * PI * h)
}

/// `∫ 𝓔^MW(x) ψ(x) dx`.
///
/// With an analytic `ψ` the level sets of the integrand are located exactly
/// along each horizontal line and the outer integral is adaptive; otherwise
/// the nodal samples are combined by composite Simpson.
pub fn integrate_weyl(coeffs: &CoefficientSet, psi: &ScalarField, tau: f64, mu: f64, h: f64) -> Result<f64> {
    if !psi.vanishes_on_boundary() {
        return Err(Error::Validation("psi support touches the grid boundary".into()));
    }
    if psi.grid != coeffs.grid {
        return Err(Error::Validation("psi and coefficients live on different grids".into()));
    }
    let Some(support) = support_box(psi) else {
        return Ok(0.0);
    };
    if psi.analytic.is_none() {
        let grid = coeffs.grid;
        let values: Vec<f64> = grid
            .nodes()
            .map(|(i, j)| {
                let p = grid.point(i, j);
                magnetic_weyl_density(coeffs, p, tau, mu, h) * psi.values[grid.index(i, j)]
            })
            .collect();
        return Ok(simpson_2d(&grid, &values));
    }
    let [x0, x1, y0, y1] = support;
    let a = coeffs.grid.spacing();
    let rule = GaussRule::new(8);
    let samples = ((4.0 * (x1 - x0) / a).ceil() as usize).max(64);
    let inner = |y: f64| line_integral(coeffs, psi, &rule, y, x0, x1, samples, a, tau, mu, h);
    let scale = density_prefactor(mu, h);
    let (value, _) = adaptive_gk(inner, y0, y1, 1e-12 * scale, 1e-10)?;
    Ok(value)
}

/// Bounding box of the nonzero samples of `ψ`, widened by one cell.
fn support_box(psi: &ScalarField) -> Option<[f64; 4]> {
    let g = psi.grid;
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for (i, j) in g.nodes() {
        if psi.at(i, j) != 0.0 {
            i0 = i0.min(i);
            i1 = i1.max(i);
            j0 = j0.min(j);
            j1 = j1.max(j);
        }
    }
    if i0 == usize::MAX {
        return None;
    }
    Some([g.x(i0 - 1), g.x(i1 + 1), g.y(j0 - 1), g.y(j1 + 1)])
}

#[allow(clippy::too_many_arguments)]
fn line_integral(
    coeffs: &CoefficientSet,
    psi: &ScalarField,
    rule: &GaussRule,
    y: f64,
    x0: f64,
    x1: f64,
    samples: usize,
    a: f64,
    tau: f64,
    mu: f64,
    h: f64,
) -> f64 {
    // c(x) = (V + 2τ)/(μhF); level n is admissible where c ≥ 2n + 1
    let c = |x: f64| {
        let lg = coeffs.local([x, y], 0);
        (lg.v.value() + 2.0 * tau) / (mu * h * lg.f.value())
    };
    let count = |x: f64| {
        let lg = coeffs.local([x, y], 0);
        level_count(lg.v.value(), lg.f.value(), tau, mu, h)
    };
    let mut breaks = vec![x0];
    let step = (x1 - x0) / samples as f64;
    let mut xa = x0;
    let mut na = count(x0);
    for s in 1..=samples {
        let xb = if s == samples { x1 } else { x0 + s as f64 * step };
        let nb = count(xb);
        if na != nb {
            let (lo, hi) = (na.min(nb), na.max(nb));
            let mut roots: Vec<f64> = (lo..hi)
                .map(|n| {
                    let level = (2 * n + 1) as f64;
                    bisect(|x| c(x) - level, xa, xb, 1e-15)
                })
                .collect();
            roots.sort_by(f64::total_cmp);
            breaks.extend(roots);
        }
        xa = xb;
        na = nb;
    }
    breaks.push(x1);
    let pref = density_prefactor(mu, h);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let n = count(0.5 * (lo + hi));
        if n == 0 {
            continue;
        }
        let pieces = ((hi - lo) / a).ceil().max(1.0) as usize;
        let d = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let (p, q) = (lo + k as f64 * d, if k + 1 == pieces { hi } else { lo + (k + 1) as f64 * d });
            total += n as f64
                * rule.integrate(p, q, |x| {
                    let lg = coeffs.local([x, y], 0);
                    lg.f.value() * lg.sqrt_g.value() * psi.eval([x, y])
                });
        }
    }
    pref * total
}

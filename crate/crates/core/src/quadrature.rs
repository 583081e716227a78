//! One- and two-dimensional quadrature and scalar root bracketing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::Grid2D;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-order Gauss–Legendre rule mapped to an interval.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + r * x)).sum();
        s * r
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let d = r * XGK[j];
        let s = f(c - d) + f(c + d);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_gk(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_INTERVALS: usize = 4000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand in adaptive quadrature".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach tolerance (error estimate {err:.3e})"
            )));
        }
        let k = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at double precision
            let total: f64 = parts.iter().map(|p| p.2).sum::<f64>() + gk15(&mut f, lo, hi).0;
            return Ok((total, err));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Bisection on a bracketing interval; `fa` and `fb` must differ in sign
/// (zero counts as non-negative).
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let pos_a = f(a) >= 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        if (f(m) >= 0.0) == pos_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on `[a, b]`, located by sampling at `samples + 1`
/// equispaced points and refining each bracket by bisection.
///
/// Pairs of roots closer than the sampling step can be missed.
pub fn find_roots(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(1);
    let step = (b - a) / samples as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 1..=samples {
        let x1 = if i == samples { b } else { a + i as f64 * step };
        let f1 = f(x1);
        if (f0 >= 0.0) != (f1 >= 0.0) {
            roots.push(bisect(&mut f, x0, x1, 1e-14 * (1.0 + x1.abs())));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Composite Simpson rule over grid samples; an odd number of intervals
/// is closed with the 3/8 rule on the last three.
pub fn simpson_2d(grid: &Grid2D, values: &[f64]) -> f64 {
    let wx = simpson_weights(grid.nx, grid.spacing());
    let wy = simpson_weights(grid.ny, grid.spacing());
    let mut s = 0.0;
    for j in 0..grid.ny {
        let mut row = 0.0;
        for i in 0..grid.nx {
            row += wx[i] * values[grid.index(i, j)];
        }
        s += wy[j] * row;
    }
    s
}

fn simpson_weights(n: usize, a: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for k in (0..simpson_end).step_by(2) {
        w[k] += a / 3.0;
        w[k + 1] += 4.0 * a / 3.0;
        w[k + 2] += a / 3.0;
    }
    if simpson_end < intervals {
        let k = simpson_end;
        for (d, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[k + d] += 3.0 * a / 8.0 * c;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16] {
            let rule = GaussRule::new(n);
            for p in 0..(2 * n) {
                let exact = if p % 2 == 0 { 2.0 / (p + 1) as f64 } else { 0.0 };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(p as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} p={p}: {got}");
            }
        }
    }

    #[test]
    fn adaptive_handles_kinks_and_endpoint_singularities() {
        let (v, _) = adaptive_gk(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-12, 1e-12).unwrap();
        let exact = 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7;
        assert!((v - exact).abs() < 1e-12, "{v}");
        let (v, _) = adaptive_gk(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn roots_are_refined_to_double_precision() {
        let r = find_roots(|x| x * x - 0.5, -1.0, 1.0, 16);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.5f64.sqrt()).abs() < 1e-13);
        assert!((r[1] - 0.5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_on_cubics_for_both_parities() {
        for n in [9, 10] {
            let g = Grid2D::square(n, -1.0, 1.0).unwrap();
            let v: Vec<f64> = g
                .nodes()
                .map(|(i, j)| {
                    let [x, y] = g.point(i, j);
                    x.powi(3) + x * x * y * y + 1.0
                })
                .collect();
            let exact = 4.0 / 9.0 + 4.0;
            assert!((simpson_2d(&g, &v) - exact).abs() < 1e-12, "n={n}");
        }
    }
}

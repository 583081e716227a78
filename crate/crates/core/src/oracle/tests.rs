use std::f64::consts::PI;

use approx::assert_relative_eq;

use super::*;
use crate::fields::{bump, Grid2D};

fn c(v: f64) -> FieldFn {
    field_fn(move |x, _| Jet::constant(v, x.order()))
}

/// Flat metric, `F ≡ b` in the symmetric gauge.
fn flat(b: f64, v: FieldFn) -> CoefficientSet {
    let grid = Grid2D::square(33, -1.0, 1.0).unwrap();
    CoefficientSet::euclidean(grid, field_fn(move |_, y| y * (-0.5 * b)), field_fn(move |x, _| x * (0.5 * b)), v, 1e-3)
        .unwrap()
}

fn og(n: usize) -> Grid2D {
    oracle_grid(n, -1.0, 1.0).unwrap()
}

fn poly(f: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static) -> ScalarField {
    ScalarField::from_fn(og(8), field_fn(f)).unwrap()
}

#[test]
fn two_by_two_and_diagonal_matrices() {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let m = Mat::from_fn(2, 2, |r, s| match (r, s) {
        (0, 1) => i,
        (1, 0) => -i,
        _ => z,
    });
    let (vals, _) = dense_eigen(&m).unwrap();
    assert_relative_eq!(vals[0], -1.0, epsilon = 1e-14);
    assert_relative_eq!(vals[1], 1.0, epsilon = 1e-14);

    let d = [3.0, -1.0, 2.0];
    let m = Mat::from_fn(3, 3, |r, s| if r == s { C64::new(d[r], 0.0) } else { z });
    let (vals, vecs) = dense_eigen(&m).unwrap();
    assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    for (k, node) in [1usize, 2, 0].into_iter().enumerate() {
        assert_relative_eq!(vecs[(node, k)].norm(), 1.0, epsilon = 1e-14);
    }
}

#[test]
fn assembly_is_exactly_hermitian() {
    let op = assemble(&flat(1.0, c(1.0)), og(12), 0.8, 0.1).unwrap();
    assert_eq!(op.hermitian_defect(), 0.0);
    for r in 0..op.dim() {
        assert_eq!(op.get(r, r).im, 0.0);
    }

    // non-diagonal metric exercises the plaquette cross terms
    let grid = Grid2D::square(17, -1.0, 1.0).unwrap();
    let coeffs = CoefficientSet::new(
        grid,
        CoefficientFns {
            g11: field_fn(|x, _| x * 0.2 + 1.0),
            g12: field_fn(|x, y| x * y * 0.3 + 0.2),
            g22: c(1.5),
            a1: field_fn(|_, y| y * -0.5),
            a2: field_fn(|x, _| x * 0.5),
            v: c(1.0),
        },
        1e-3,
    )
    .unwrap();
    let op = assemble(&coeffs, og(12), 0.8, 0.1).unwrap();
    assert_eq!(op.hermitian_defect(), 0.0);
    let r = op.unknown(6, 6).unwrap();
    let diagonal = op.unknown(7, 7).unwrap();
    assert!(op.get(r, diagonal).norm() > 0.0);
    let plain = assemble(&flat(1.0, c(1.0)), og(12), 0.8, 0.1).unwrap();
    assert_eq!(plain.get(r, diagonal).norm(), 0.0);
}

#[test]
fn free_dirichlet_ground_state() {
    // μ = 0: ½h²(−Δ) on [−1, 1]², lowest eigenvalue ½h²·2π²/L²
    let h = 0.1;
    let want = 0.5 * h * h * 2.0 * PI * PI / 4.0;
    let errs: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            let ev = eigenvalues(&assemble(&flat(1.0, c(0.0)), og(n), 0.0, h).unwrap()).unwrap();
            (ev[0] - want).abs() / want
        })
        .collect();
    assert!(errs[1] < 2e-3, "{errs:?}");
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
}

#[test]
fn landau_levels_cluster() {
    // μh = 0.4, V ≡ 0: levels ½(2n+1)·0.4
    let (mu, h) = (4.0, 0.1);
    let ev = eigenvalues(&assemble(&flat(1.0, c(0.0)), og(24), mu, h).unwrap()).unwrap();
    let degeneracy = mu * 4.0 / (2.0 * PI * h);
    let bulk = (0.5 * degeneracy) as usize;
    for k in 0..bulk {
        assert!((ev[k] - 0.2).abs() < 0.05 * 0.4, "k={k}: {}", ev[k]);
    }
}

#[test]
fn landau_eigenvalue_error_converges() {
    let (mu, h) = (4.0, 0.1);
    let err = |n: usize| {
        let ev = eigenvalues(&assemble(&flat(1.0, c(0.0)), og(n), mu, h).unwrap()).unwrap();
        (ev[0] - 0.2).abs()
    };
    let (coarse, fine) = (err(24), err(48));
    let order = (coarse / fine).ln() / (49.0f64 / 25.0).ln();
    assert!(order >= 1.8, "order {order}: {coarse:e} -> {fine:e}");
}

#[test]
fn eigenpairs_satisfy_residual_and_orthonormality() {
    let op = assemble(&flat(1.0, field_fn(|x, y| x * 0.3 + y * y + 1.0)), og(10), 0.8, 0.1).unwrap();
    let sd = eigensolve(&op).unwrap();
    let a2 = op.grid.spacing().powi(2);
    let norm = op.norm_bound();
    for k in [0, 17, sd.len() - 1] {
        let u = sd.vector(k);
        let au = op.apply(&u);
        let res = au.iter().zip(&u).map(|(x, y)| (x - y * sd.eigenvalues[k]).norm_sqr()).sum::<f64>().sqrt();
        let un = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * norm * un, "k={k}");
        for l in [0, 5, k] {
            let w = sd.vector(l);
            let ip: C64 = u.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<C64>() * a2;
            let want = if l == k { 1.0 } else { 0.0 };
            assert!((ip - C64::new(want, 0.0)).norm() < 1e-10);
        }
    }
    assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn counting_functional_edges() {
    let op = assemble(&flat(1.0, c(1.0)), og(12), 0.8, 0.1).unwrap();
    let sd = eigensolve(&op).unwrap();
    let ones = ScalarField::constant(op.grid, 1.0);
    assert_eq!(spectral_count(&sd, &ones, sd.eigenvalues[0] - 1.0), 0.0);
    let n = op.dim() as f64;
    assert!((spectral_count(&sd, &ones, f64::INFINITY) - n).abs() < 1e-9 * n);
    let tau = sd.eigenvalues[40];
    let partial = spectral_count(&sd, &ones, tau);
    assert!((partial - 41.0).abs() < 1e-10);
}

#[test]
fn landau_count_matches_degeneracy_density() {
    let (mu, h) = (4.0, 0.1);
    let op = assemble(&flat(1.0, c(1.0)), og(28), mu, h).unwrap();
    let sd = eigensolve(&op).unwrap();
    let psi = bump(op.grid, [0.0, 0.0], 0.5, 2.0).unwrap();
    let a2 = op.grid.spacing().powi(2);
    let q: f64 = psi.values.iter().sum::<f64>() * a2;
    let got = spectral_count(&sd, &psi, 0.0);
    let want = mu / (2.0 * PI * h) * q;
    assert!((got - want).abs() < 0.05 * want, "{got} vs {want}");
}

#[test]
fn gauge_shifts_leave_the_spectrum_unchanged() {
    let coeffs = flat(1.0, field_fn(|x, y| x * 0.2 + y * y * 0.1 + 1.0));
    let grid = og(10);
    let check = |chi: ScalarField| gauge_check(&coeffs, grid, 0.8, 0.1, &chi).unwrap().deviation;
    assert_eq!(check(poly(|x, _| Jet::constant(0.7, x.order()))), 0.0);
    assert!(check(poly(|x, _| x)) <= 1e-12);
    assert!(check(poly(|x, y| x * 0.3 - y * 1.1)) <= 1e-12);
    assert!(check(poly(|x, y| x * y)) <= 1e-9);
    assert!(check(poly(|x, y| x * x * y)) <= 1e-9);
    let cubic = check(poly(|x, _| x * x * x));
    assert!(cubic > 1e-9 && cubic < 1e-2, "{cubic}");
}

#[test]
fn reflection_reverses_the_field_without_changing_the_spectrum() {
    let left = eigenvalues(&assemble(&flat(1.0, field_fn(|x, _| x * 0.3 + 1.0)), og(10), 0.8, 0.1).unwrap()).unwrap();
    let right =
        eigenvalues(&assemble(&flat(1.0, field_fn(|x, _| x * -0.3 + 1.0)), og(10), 0.8, 0.1).unwrap()).unwrap();
    let scale = left.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let dev = left.iter().zip(&right).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev <= 1e-9 * scale);
}

#[test]
fn guards_name_the_violation_and_the_fix() {
    let coeffs = flat(1.0, c(1.0));
    let err = assemble(&coeffs, og(20), 8.0, 0.05).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Guard(_)));
    assert!(msg.contains("flux per plaquette") && msg.contains("interior nodes"), "{msg}");
    // the suggested size passes the flux guard
    let need: usize = msg.split("at least ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    let flux = |n: usize| 8.0 * (2.0 / (n as f64 + 1.0)).powi(2) / 0.05;
    assert!(flux(need) <= 0.3 && flux(need - 1) > 0.3);

    let opts = OracleOptions { max_flux: 10.0, ..OracleOptions::default() };
    let err = assemble_with(&coeffs, og(20), 8.0, 0.05, &opts).unwrap_err();
    assert!(err.to_string().contains("magnetic length"));

    let err = assemble(&flat(0.01, c(1.0)), og(70), 1.0, 0.5).unwrap_err();
    assert!(matches!(err, Error::Validation(_)));
    assert!(err.to_string().contains("dense eigensolver limit"));
}

#[test]
fn eigenvalue_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("ev.laev");
    let values = vec![-0.5, 0.0, 1.25e-300, f64::MAX];
    write_laev(&path, &values).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"LAEV");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 4);
    assert_eq!(bytes.len(), 16 + 32);
    assert_eq!(read_laev(&path).unwrap(), values);

    std::fs::write(&path, b"NOPE0000").unwrap();
    assert!(read_laev(&path).is_err());
}

#[test]
fn cache_keys_separate_runs() {
    let g = og(16);
    let k = cache_key("constant", &g, 8.0, 0.05);
    assert_eq!(k.len(), 64);
    assert_eq!(k, cache_key("constant", &g, 8.0, 0.05));
    assert_ne!(k, cache_key("constant", &g, 8.0, 0.050000001));
    assert_ne!(k, cache_key("constant", &og(18), 8.0, 0.05));
    assert_ne!(k, cache_key("saddle", &g, 8.0, 0.05));
}

#[test]
fn staggered_weights_differentiate_polynomials_exactly() {
    for order in [2, 4, 6, 8] {
        let w = staggered_weights(order).unwrap();
        for p in 0..=order as i32 {
            let d: f64 = w
                .iter()
                .enumerate()
                .map(|(m, c)| {
                    let x = m as f64 + 0.5;
                    c * (x.powi(p) - (-x).powi(p))
                })
                .sum();
            let want = if p == 1 { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-13, "order {order}, degree {p}: {d}");
        }
    }
    assert!(staggered_weights(3).is_err());
}

#[test]
fn landau_levels_improve_with_stencil_order() {
    let (mu, h) = (4.0, 0.1);
    let coeffs = flat(1.0, c(0.0));
    let err = |order: usize| {
        let opts = OracleOptions { stencil_order: order, ..OracleOptions::default() };
        let ev = eigenvalues(&assemble_with(&coeffs, og(24), mu, h, &opts).unwrap()).unwrap();
        (ev[0] - 0.2).abs()
    };
    let e: Vec<f64> = [2, 4, 8].into_iter().map(err).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
}

use proptest::prelude::*;

use super::*;

fn harmonic(hbar: f64, l: f64) -> Symbol1D {
    Symbol1D::new(phase_fn(|x, xi| x * x + xi * xi), hbar, l, l, l).unwrap()
}

// exact area of {x, u > 0, x + u ≤ ρ, xu < w}
fn hyperbola_gap(w: f64, rho: f64) -> f64 {
    let d = (rho * rho - 4.0 * w).sqrt();
    let (xp, xm) = (0.5 * (rho + d), 0.5 * (rho - d));
    0.5 * rho * rho - (rho * (xp - xm) - 0.5 * (xp * xp - xm * xm) - w * (xp / xm).ln())
}

#[test]
fn landau_symbol_examples() {
    let prof = SectionProfile::constant(1.0, 1.0, 0.0, 1.0);
    let a1 = landau_symbol(&prof, 1, 4.0, 0.1).unwrap();
    let a0 = landau_symbol(&prof, 0, 4.0, 0.1).unwrap();
    for (x, xi) in [(0.0, 0.0), (0.3, -0.7), (-1.0, 1.0)] {
        assert!((a1.eval(x, xi) - 0.2).abs() < 1e-12);
        assert!((a0.eval(x, xi) + 0.6).abs() < 1e-12);
    }
    assert!((a1.hbar - 0.025).abs() < 1e-15);
    let missing = SectionProfile { vf: None, ..prof };
    assert!(landau_symbol(&missing, 0, 4.0, 0.1).unwrap_err().to_string().contains("V/F"));
}

#[test]
fn landau_symbol_near_a_saddle_matches_the_model() {
    let (k, v0, mu, h, w1) = (1.5, 1.1, 4.0, 0.1, 0.7);
    let prof = SectionProfile {
        vf: Some(phase_fn(move |x, xi| v0 - k * x * xi + 0.3 * x.powi(3) - 0.2 * xi.powi(3))),
        f: Some(phase_fn(|_, _| 1.0)),
        omega1: Some(phase_fn(move |_, _| w1)),
        lx: 1.0,
        lxi: 1.0,
        rho: 1.0,
    };
    let n = 1;
    let a = landau_symbol(&prof, n, mu, h).unwrap();
    let w = -v0 + (2 * n + 1) as f64 * mu * h;
    let model = |x: f64, xi: f64| k * x * xi + w + w1 / (mu * mu);
    let err = |r: f64| (a.eval(r, 0.6 * r) - model(r, 0.6 * r)).abs();
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 8.0).abs() < 0.1, "{ratio}");
}

#[test]
fn constant_symbol_quantizes_to_identity() {
    let s = Symbol1D::new(phase_fn(|_, _| 2.5), 0.1, 1.0, 1.0, 1.0).unwrap();
    let q = weyl_quantize(&s, 64).unwrap();
    for j in 0..64 {
        for l in 0..64 {
            let want = if j == l { 2.5 } else { 0.0 };
            assert!((q.matrix[(j, l)] - C64::new(want, 0.0)).norm() < 1e-13);
        }
    }
}

#[test]
fn harmonic_oscillator_levels() {
    let hbar = 0.05;
    let q = weyl_quantize(&harmonic(hbar, 2.5).with_edge_level(1.0), 256).unwrap();
    let ev = q.eigenvalues().unwrap();
    for (m, l) in ev.iter().take(10).enumerate() {
        assert!((l - (2 * m + 1) as f64 * hbar).abs() < 1e-3, "{m}: {l}");
    }
}

#[test]
fn odd_symbol_has_symmetric_spectrum() {
    let s = Symbol1D::new(phase_fn(|x, xi| x * xi), 0.05, 1.0, 1.0, 1.0).unwrap();
    let q = weyl_quantize(&s, 128).unwrap();
    assert!(q.asymmetry < 1e-12);
    let ev = q.eigenvalues().unwrap();
    let n = ev.len();
    for k in 0..n / 2 {
        assert!((ev[k] + ev[n - 1 - k]).abs() < 1e-10, "{} {}", ev[k], ev[n - 1 - k]);
    }
}

#[test]
fn edge_guard_rejects_open_level_sets() {
    let s = Symbol1D::new(phase_fn(|x, xi| x * xi), 0.05, 1.0, 1.0, 1.0).unwrap().with_edge_level(0.0);
    let err = weyl_quantize(&s, 64).unwrap_err();
    assert!(err.to_string().contains("level set touches box boundary"), "{err}");
    assert!(weyl_quantize(&harmonic(0.05, 1.0), 63).is_err());
}

#[test]
fn asymmetry_stays_at_rounding_level() {
    for n in [256, 512, 1024] {
        let q = weyl_quantize(&harmonic(0.05, 2.0), n).unwrap();
        let scale = (0..n).map(|j| q.matrix[(j, j)].norm()).fold(0.0, f64::max);
        assert!(q.asymmetry <= 1e-12 * scale, "{n}: {} vs {scale}", q.asymmetry);
    }
}

#[test]
fn quantized_and_phase_space_counts_agree_for_harmonic() {
    let hbar = 0.05;
    let s = harmonic(hbar, 2.5);
    let q = weyl_quantize(&s, 256).unwrap();
    for level in [0.3, 1.0, 1.77] {
        let quantized = q.count_below(level).unwrap() as f64;
        let classical = phasespace_count(&s, level).unwrap();
        let exact = (level / (2.0 * hbar) - 0.5).floor() + 1.0;
        assert_eq!(quantized, exact);
        let perimeter = 2.0 * PI * level.sqrt();
        assert!((quantized - classical).abs() <= 3.0 + 0.5 * perimeter / hbar);
        assert!((classical - level / (2.0 * hbar)).abs() < 1e-7);
    }
}

#[test]
fn phase_space_examples() {
    let hbar = 0.05;
    for rho in [0.3, 0.5, 1.0] {
        let s = Symbol1D::new(phase_fn(|x, xi| x * xi), hbar, rho, rho, rho).unwrap();
        let want = rho * rho / (2.0 * PI * hbar);
        assert!((phasespace_count(&s, 0.0).unwrap() - want).abs() < 1e-8);
    }
    let one = Symbol1D::new(phase_fn(|_, _| 1.0), hbar, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(phasespace_count(&one, 0.0).unwrap(), 0.0);
    let rho = 0.5;
    let m = SaddleModelParams::saddle(0.0, 1.0, 0.0, 1.0, hbar);
    let area0 = phasespace_area(&m.symbol(0.0, rho).unwrap(), 0.0).unwrap();
    let area = phasespace_area(&m.symbol(0.01, rho).unwrap(), 0.0).unwrap();
    assert!((area0 - area - 2.0 * hyperbola_gap(0.01, rho)).abs() < 1e-9);
}

#[test]
fn log_coefficient_tracks_the_exact_derivative() {
    let (hbar, rho, mu, k) = (0.05, 1.0, 30.0, 1.0);
    let mut prev: Option<f64> = None;
    for w in [1e-1, 4e-3, 2e-3, 1e-3] {
        let omega1 = 1e-4 * w * mu * mu;
        let c = saddle_log_coefficient(&SaddleModelParams::saddle(w, k, omega1, mu, hbar), rho).unwrap();
        let d = (rho * rho - 4.0 * w).sqrt();
        let exact = -2.0 * ((rho + d) / (rho - d)).ln() / (2.0 * PI * hbar);
        assert!((c.measured / exact - 1.0).abs() < 1e-3, "{} {exact}", c.measured);
        if let Some(p) = prev {
            // halving w adds about 2 log 2 / (2πħ)
            let step: f64 = (p - c.measured) * 2.0 * PI * hbar;
            assert!((step - 2.0 * 2f64.ln()).abs() < 0.1, "{step}");
        }
        prev = (w < 5e-3).then_some(c.measured);
    }
    let zero = saddle_log_coefficient(&SaddleModelParams::saddle(0.01, k, 0.0, mu, hbar), rho).unwrap();
    assert_eq!(zero.measured, 0.0);
    assert!(saddle_log_coefficient(&SaddleModelParams::saddle(0.5, k, 0.0, mu, hbar), rho).is_err());
    assert!(saddle_log_coefficient(&SaddleModelParams::saddle(1e-3, k, 10.0, 2.0, hbar), rho).is_err());
}

#[test]
fn extremum_model_has_no_log_growth() {
    let (hbar, rho, mu) = (0.05, 1.0, 30.0);
    let coeff = |w: f64| {
        let p = SaddleModelParams {
            kind: ModelKind::Extremum,
            ..SaddleModelParams::saddle(w, 1.0, 1e-3 * w.abs() * mu * mu, mu, hbar)
        };
        saddle_log_coefficient(&p, rho).unwrap().measured
    };
    let (a, b) = (coeff(-1e-1), coeff(-1e-3));
    let unit = 1.0 / (2.0 * PI * hbar);
    assert!((a / b - 1.0).abs() < 1e-3, "{a} {b}");
    assert!((a + PI * unit).abs() < 1e-3 * unit);
}

#[test]
fn log_signature_fit() {
    let ws: Vec<f64> = (0..13).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
    let sig = log_signature(0.05, 1.0, &ws).unwrap();
    assert!(sig.max_rel_residual <= 0.02, "{}", sig.max_rel_residual);
    assert!(sig.log_term_present());
    assert!((sig.branches - 2.0).abs() < 0.1, "{}", sig.branches);
    for (w, d) in sig.ws.iter().zip(&sig.differences) {
        let exact = -2.0 * hyperbola_gap(*w, 1.0) / (2.0 * PI * 0.05);
        assert!((d - exact).abs() < 1e-7, "{w}: {d} {exact}");
    }
}

#[test]
fn sweep_rows_are_sorted_and_serialized() {
    let p = SaddleModelParams::saddle(0.0, 1.0, 1e-3, 10.0, 0.05);
    let rows = saddle_sweep(&p, 1.0, &[1e-2, 1e-1, 1e-3]).unwrap();
    assert!(rows.windows(2).all(|r| r[0].w < r[1].w));
    let csv = sweep_csv(&rows);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("w,count_unperturbed,count_perturbed,measured_coeff,predicted_coeff"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn saddle_count_is_nonincreasing_in_w(w in 0.0f64..0.2, dw in 1e-4f64..0.05) {
        let m = SaddleModelParams::saddle(0.0, 1.0, 0.0, 1.0, 0.05);
        let lo = phasespace_count(&m.symbol(w, 1.0).unwrap(), 0.0).unwrap();
        let hi = phasespace_count(&m.symbol(w + dw, 1.0).unwrap(), 0.0).unwrap();
        prop_assert!(hi <= lo + 1e-8);
    }
}

use super::*;
use crate::error::Error;

const BASE: &str = r#"
[scenario]
name = "radial"
kind = "radial"
b = 1
v0 = 1.0
c = 0.5

[regime]
mu = 2
h = 0.1

[grid]
interior = 16
"#;

fn base() -> Config {
    Config::from_toml(BASE).unwrap()
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = base();
    assert_eq!(cfg.scenario.kind, ScenarioKind::Radial { b: 1.0, v0: 1.0, c: 0.5 });
    assert_eq!(cfg.grid.stencil_order, 8);
    let back = Config::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
}

#[test]
fn unknown_keys_are_rejected() {
    let bad = BASE.replace("c = 0.5", "c = 0.5\nbogus = 1");
    assert!(matches!(Config::from_toml(&bad), Err(Error::Config(_))));
    let bad = BASE.replace("h = 0.1", "h = 0.1\nnu = 3");
    assert!(matches!(Config::from_toml(&bad), Err(Error::Config(_))));
}

#[test]
fn psi_outside_half_ball_is_rejected() {
    // a [scenario.psi] table after [grid] still belongs to the scenario
    let bad = format!("{BASE}\n[scenario.psi]\ncenter = [0.2, 0.0]\nradius = 0.45\n");
    assert!(matches!(Config::from_toml(&bad), Err(Error::Validation(_))));
}

#[test]
fn harmonic_saddle_prediction_has_no_correction() {
    let mut cfg = base();
    cfg.scenario.kind = ScenarioKind::HarmonicSaddle { b: 1.0, v0: 1.0, c: 0.5 };
    cfg.regime.mu = 4.0;
    cfg.regime.h = 0.05;
    let (_, points, pred) = prediction(&cfg, &RunOptions::default()).unwrap();
    assert!(points.iter().any(|p| p.is_saddle()));
    assert!(pred.corr_sum().abs() < 1e-12);
    assert!((pred.total - pred.weyl_integral).abs() < 1e-12);
}

#[test]
fn vanishing_field_fails_construction() {
    let mut cfg = base();
    cfg.scenario.kind = ScenarioKind::Polynomial {
        g11: vec![(0, 0, 1.0)],
        g12: vec![],
        g22: vec![(0, 0, 1.0)],
        a1: vec![],
        a2: vec![(2, 0, 1.0)],
        v: vec![(0, 0, 1.0)],
    };
    let err = run_scenario(&cfg, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Validation(ref m) if m.contains("F ≥ ε₀")), "{err}");
}

#[test]
fn perturbation_is_seeded() {
    let mut cfg = base();
    cfg.scenario.perturb = 0.05;
    let a = prediction(&cfg, &RunOptions { seed: 7, grid: None }).unwrap().2.weyl_integral;
    let b = prediction(&cfg, &RunOptions { seed: 7, grid: None }).unwrap().2.weyl_integral;
    let c = prediction(&cfg, &RunOptions { seed: 8, grid: None }).unwrap().2.weyl_integral;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn runs_are_deterministic() {
    let cfg = base();
    let a = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let b = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(a.remainder, a.n_exact - a.n_pred);
    assert_eq!(a.grid, 16);
}

#[test]
fn single_run_report_has_one_row_and_no_plot() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_scenario(&base(), &RunOptions::default()).unwrap();
    persist_run(dir.path(), &r, "single", false).unwrap();
    let files = emit_report(dir.path(), false).unwrap();
    let text = std::fs::read_to_string(&files.summary).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], SUMMARY_HEADER);
    assert!(lines[1].ends_with(','), "seconds column stays empty without timings");
    assert!(files.plots.is_empty());
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(&files.manifest).unwrap()).unwrap();
    assert_eq!(m.runs.len(), 1);
}

#[test]
fn empty_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_report(dir.path(), false).is_err());
}

#[test]
fn sweep_writes_rows_plot_and_is_byte_stable() {
    let mut cfg = base();
    cfg.sweep = Some(SweepConfig {
        axis: SweepAxis::Mu,
        points: vec![2.0, 1.3, 1.6, 1.0],
        mu_exponent: None,
        mu_scale: 1.0,
        nbar: None,
        coarse_interior: Some(12),
        name: Some("mu-test".into()),
    });
    let dir = tempfile::tempdir().unwrap();
    let fit = sweep_and_fit(&cfg, &RunOptions::default(), 2, Some(dir.path()), false).unwrap();
    let mus: Vec<f64> = fit.points.iter().map(|p| p.report.mu).collect();
    assert_eq!(mus, vec![1.0, 1.3, 1.6, 2.0]);
    assert!(fit.exponent_inv_h.is_none());
    let files = emit_report(dir.path(), false).unwrap();
    let first = std::fs::read(&files.summary).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 5);
    assert_eq!(files.plots.len(), 1);
    let svg = std::fs::read_to_string(&files.plots[0]).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    let sweep_csv = std::fs::read_to_string(dir.path().join("sweeps/mu-test.csv")).unwrap();
    assert_eq!(sweep_csv.lines().count(), 5);

    sweep_and_fit(&cfg, &RunOptions::default(), 1, Some(dir.path()), false).unwrap();
    let files = emit_report(dir.path(), false).unwrap();
    assert_eq!(std::fs::read(&files.summary).unwrap(), first);
}

#[test]
fn short_sweeps_are_rejected() {
    let mut cfg = base();
    cfg.sweep = Some(SweepConfig {
        axis: SweepAxis::Mu,
        points: vec![1.0, 2.0, 3.0],
        mu_exponent: None,
        mu_scale: 1.0,
        nbar: None,
        coarse_interior: None,
        name: None,
    });
    assert!(matches!(sweep_and_fit(&cfg, &RunOptions::default(), 1, None, false), Err(Error::Validation(_))));
}

#[test]
fn sigma_axis_places_the_level_at_the_saddle() {
    let mut cfg = base();
    cfg.scenario.kind = ScenarioKind::Saddle { b: 1.0, v0: 1.0, alpha: 1.0, beta: 2.0 };
    let sweep = SweepConfig {
        axis: SweepAxis::Sigma,
        points: vec![0.01],
        mu_exponent: None,
        mu_scale: 1.0,
        nbar: Some(1),
        coarse_interior: None,
        name: None,
    };
    let pc = point_config(&cfg, &sweep, 0.01, Some((1.0, 1))).unwrap();
    let gap = crate::asymptote::sigma_gap(1.0, 1.0, pc.regime.mu, pc.regime.h);
    assert!((gap.sigma - 0.01).abs() < 1e-12);
    assert_eq!(gap.nbar, 1);
}

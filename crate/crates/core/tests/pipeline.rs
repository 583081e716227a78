use magweyl::harness::{point_config, prediction, run_scenario, sweep_and_fit, Config, RunOptions, ScenarioKind};
use magweyl::Error;

fn cfg(extra: &str) -> Config {
    Config::from_toml(&format!(
        "[scenario]\nname = \"radial\"\nkind = \"radial\"\nc = 0.5\n{extra}\n[regime]\nmu = 2.0\nh = 0.1\n[grid]\ninterior = 16\n"
    ))
    .unwrap()
}

#[test]
fn report_prediction_matches_the_asymptote_module() {
    let c = cfg("");
    let r = run_scenario(&c, &RunOptions::default()).unwrap();
    let (_, _, pred) = prediction(&c, &RunOptions::default()).unwrap();
    assert_eq!(r.n_pred, pred.total);
    assert_eq!(r.n_weyl, pred.weyl_integral);
    assert_eq!(r.remainder, r.n_exact - r.n_pred);
    assert!(r.guards.flux_per_plaquette <= 0.3);
}

#[test]
fn sweep_points_equal_independent_runs() {
    let mut c = cfg("");
    c.sweep = Some(toml::from_str("axis = \"mu\"\npoints = [1.0, 1.5, 2.0, 1.25]").unwrap());
    let fit = sweep_and_fit(&c, &RunOptions::default(), 2, None, false).unwrap();
    let sweep = c.sweep.clone().unwrap();
    for p in &fit.points {
        let alone = run_scenario(&point_config(&c, &sweep, p.coordinate, None).unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(alone.without_timing(), p.report.without_timing());
    }
}

#[test]
fn resonant_scenarios_drop_the_potential_bound() {
    let mut c = cfg("");
    c.scenario.kind = ScenarioKind::Polynomial {
        g11: vec![(0, 0, 1.0)],
        g12: vec![],
        g22: vec![(0, 0, 1.0)],
        a1: vec![(0, 1, -0.5)],
        a2: vec![(1, 0, 0.5)],
        v: vec![(0, 0, -0.05), (2, 0, 0.3)],
    };
    let err = run_scenario(&c, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Validation(ref m) if m.contains("V ≥ ε₀")), "{err}");

    c.scenario.kind = ScenarioKind::Resonant { b: 1.0, nbar: 0, w: vec![(0, 0, -0.05), (2, 0, 0.3)] };
    let r = run_scenario(&c, &RunOptions::default()).unwrap();
    assert!(r.n_exact.is_finite() && r.remainder.is_finite());
}

#[test]
fn seeded_perturbations_reproduce() {
    let c = cfg("perturb = 0.05");
    let a = run_scenario(&c, &RunOptions { seed: 11, grid: None }).unwrap();
    let b = run_scenario(&c, &RunOptions { seed: 11, grid: None }).unwrap();
    let other = run_scenario(&c, &RunOptions { seed: 12, grid: None }).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    assert_ne!(a.n_exact, other.n_exact);
}

#[test]
fn grid_override_and_guard_errors() {
    let c = cfg("");
    let r = run_scenario(&c, &RunOptions { seed: 0, grid: Some(20) }).unwrap();
    assert_eq!(r.grid, 20);
    let mut hot = c.clone();
    hot.regime.mu = 8.0;
    hot.regime.h = 0.05;
    assert!(matches!(run_scenario(&hot, &RunOptions::default()), Err(Error::Guard(_))));
}

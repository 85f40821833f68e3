mod common;

use common::lagrangian_volume;
use evans_core::model::{check_h2, classify};
use evans_core::profile::{
    fit_decay_rates, interpolation_defect, profile_residual, solve_profile, ProfileOptions,
    ShockProfile,
};
use evans_core::systems;
use evans_core::EvansError;
use nalgebra::DVector;

fn burgers_exact(grid: &[f64]) -> ShockProfile {
    let values = grid.iter().map(|x| DVector::from_element(1, -(x / 2.0).tanh())).collect();
    let derivative =
        grid.iter().map(|x| DVector::from_element(1, -0.5 / (x / 2.0).cosh().powi(2))).collect();
    ShockProfile::from_samples(
        grid.to_vec(),
        values,
        derivative,
        DVector::from_element(1, 1.0),
        DVector::from_element(1, -1.0),
    )
    .unwrap()
}

#[test]
fn burgers_profile_matches_tanh() {
    let sys = systems::shock("burgers").unwrap();
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    let err = p
        .grid
        .iter()
        .zip(&p.values)
        .map(|(x, u)| (u[0] + (x / 2.0).tanh()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-8, "sup error {err:e}");
    // between nodes as well
    let mut err_mid: f64 = 0.0;
    for k in 0..1000 {
        let x = -20.0 + 40.0 * k as f64 / 999.0;
        err_mid = err_mid.max((p.eval(x).0[0] + (x / 2.0).tanh()).abs());
    }
    assert!(err_mid <= 1e-8, "interpolated error {err_mid:e}");
}

#[test]
fn exact_burgers_profile_has_small_residual() {
    let sys = systems::shock("burgers").unwrap();
    let grid: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
    let p = burgers_exact(&grid);
    assert!(profile_residual(&sys.model, &p) <= 1e-10);
}

#[test]
fn perturbed_profile_has_large_residual() {
    let sys = systems::shock("burgers").unwrap();
    let grid: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
    let mut p = burgers_exact(&grid);
    p.values[150][0] += 1e-3;
    assert!(profile_residual(&sys.model, &p) >= 1e-4);
}

#[test]
fn constant_profile_has_zero_residual_and_unreliable_fit() {
    let sys = systems::shock("burgers").unwrap();
    let grid: Vec<f64> = (0..100).map(|i| -10.0 + 0.2 * i as f64).collect();
    let u = DVector::from_element(1, 1.0);
    let p = ShockProfile::from_samples(
        grid.clone(),
        vec![u.clone(); 100],
        vec![DVector::zeros(1); 100],
        u.clone(),
        u.clone(),
    )
    .unwrap();
    assert_eq!(profile_residual(&sys.model, &p), 0.0);
    assert!(!fit_decay_rates(&p).reliable);
}

#[test]
fn burgers_decay_rates_are_one() {
    let grid: Vec<f64> = (0..1201).map(|i| -30.0 + 0.05 * i as f64).collect();
    let fit = fit_decay_rates(&burgers_exact(&grid));
    assert!(fit.reliable);
    assert!((fit.nu_minus - 1.0).abs() <= 0.05 && (fit.nu_plus - 1.0).abs() <= 0.05, "{fit:?}");
}

#[test]
fn equal_end_states_have_no_connection() {
    let sys = systems::shock("burgers").unwrap();
    let u = DVector::from_element(1, 1.0);
    let err = solve_profile(&sys.model, &u, &u, &ProfileOptions::default()).unwrap_err();
    assert!(matches!(err, EvansError::NoConnection(_)));
}

#[test]
fn short_domain_is_reported_with_suggestion() {
    let sys = systems::shock("burgers").unwrap();
    let opts = ProfileOptions { half_length: Some(4.0), ..Default::default() };
    match solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &opts) {
        Err(EvansError::DomainTooShort { suggested, .. }) => assert!(suggested > 4.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn lagrangian_profile_matches_shooting_oracle() {
    let sys = systems::shock("isentropic_lagrangian_1d").unwrap();
    let s = sys.model.speed;
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    // monotone specific volume
    assert!(p.values.windows(2).all(|w| w[1][0] <= w[0][0] + 1e-14));
    for x in [-6.0, -2.0, -0.5, 0.7, 3.0, 8.0] {
        let v = lagrangian_volume(x, s, 1.0, 0.5, 5.0 / 3.0);
        let err = (p.eval(x).0[0] - v).abs();
        assert!(err < 1e-8, "x = {x}: {err:e}");
    }
    // algebraic row holds at every node
    let fm = sys.model.shifted_flux(&sys.u_minus);
    for u in &p.values {
        assert!((sys.model.shifted_flux(u)[0] - fm[0]).abs() < 1e-13);
    }
    for u in p.values.iter().step_by(p.len() / 32) {
        assert!(check_h2(&sys.model, u, 64) > 0.0);
    }
}

#[test]
fn lagrangian_decay_rates_match_linearization() {
    let sys = systems::shock("isentropic_lagrangian_1d").unwrap();
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    let fit = fit_decay_rates(&p);
    assert!(fit.reliable);
    // reduced scalar equation v' = g(v), g'(v) at the end states
    let s = sys.model.speed;
    let g = 5.0 / 3.0;
    let dg = |v: f64, vm: f64| {
        let pv = v.powf(-g);
        let dp = -g * v.powf(-g - 1.0);
        -(1.0 / s) * (pv - vm.powf(-g) + s * s * (v - vm)) - (v / s) * (dp + s * s)
    };
    let lm = dg(1.0, 1.0).abs();
    let lp = dg(0.5, 1.0).abs();
    assert!((fit.nu_minus - lm).abs() <= 0.1 * lm, "{} vs {lm}", fit.nu_minus);
    assert!((fit.nu_plus - lp).abs() <= 0.1 * lp, "{} vs {lp}", fit.nu_plus);
}

#[test]
fn lagrangian_refinement_order() {
    let sys = systems::shock("isentropic_lagrangian_1d").unwrap();
    let mut prev = f64::NAN;
    for nodes in [51, 101, 201, 401] {
        let opts = ProfileOptions { nodes, ..Default::default() };
        let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &opts).unwrap();
        let d = interpolation_defect(&sys.model, &p);
        if prev.is_finite() && prev > 1e-11 {
            assert!(prev / d >= 3.0, "{prev:e} -> {d:e}");
        }
        prev = d;
    }
}

#[test]
fn eulerian_profile_solves_and_is_lax() {
    let sys = systems::shock("isentropic_eulerian_2d").unwrap();
    let class = classify(&sys.model, &sys.u_minus, &sys.u_plus).unwrap();
    assert_eq!(class.i, 4);
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    assert!(profile_residual(&sys.model, &p) < 1e-9);
    // transverse velocity stays zero
    assert!(p.values.iter().all(|u| u[2].abs() < 1e-12));
}

#[test]
fn columnar_round_trip() {
    let sys = systems::shock("burgers").unwrap();
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    let q = ShockProfile::from_columns(&p.to_columns()).unwrap();
    assert_eq!(p.grid, q.grid);
    assert_eq!(p.values, q.values);
    assert_eq!(p.derivative, q.derivative);
    assert_eq!(p.nu_minus, q.nu_minus);
}

#[test]
fn shifted_phase_condition_shifts_profile() {
    let sys = systems::shock("isentropic_lagrangian_1d").unwrap();
    let p0 = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    let opts = ProfileOptions { phase_point: 1.3, ..Default::default() };
    let p1 = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &opts).unwrap();
    for x in [-4.0, -1.0, 0.0, 2.0, 5.0] {
        let a = p0.eval(x).0;
        let b = p1.eval(x + 1.3).0;
        assert!((a - b).amax() < 1e-8);
    }
}

mod common;

use std::f64::consts::PI;

use common::setup;
use evans_core::bases::*;
use evans_core::evans::{build_field, EvansVariant};
use evans_core::formulations::{CoefficientField, Frequency};
use evans_core::linalg::{self, c, CMatrix};
use evans_core::systems::GlancingFixture;
use evans_core::{EvansError, Result};
use num_complex::Complex64;

fn lagrangian_field() -> CoefficientField {
    let (sys, p) = setup("isentropic_lagrangian_1d");
    build_field(&sys.model, p, EvansVariant::Integrated1d, &Frequency::one_d(c(1.0))).unwrap()
}

fn plus_limit(field: &CoefficientField) -> impl Fn(&Frequency) -> Result<CMatrix> + '_ {
    move |f: &Frequency| Ok(field.with_frequency(f)?.limit(true).clone())
}

fn quarter_circle(steps: usize) -> Vec<Frequency> {
    (0..=steps)
        .map(|j| Frequency::one_d(Complex64::from_polar(1.0, 0.5 * PI * j as f64 / steps as f64)))
        .collect()
}

fn same_span(basis: &CMatrix, v: &[Complex64]) -> bool {
    let v = CMatrix::from_column_slice(v.len(), 1, v);
    let (q, _) = linalg::orthonormalize(basis);
    let resid = &v - &q * (q.adjoint() * &v);
    resid.norm() < 1e-12 * v.norm()
}

#[test]
fn glancing_split_at_unit_delta() {
    let a = glancing_model(0.0, 0.0, c(1.0), &|x| x);
    let s = split(&a).unwrap();
    assert_eq!((s.k_stable, s.k_unstable), (1, 1));
    assert!((s.gap - 1.0).abs() < 1e-14);
    assert!(same_span(s.stable_basis(), &[c(1.0), c(-1.0)]));
    assert!(same_span(s.unstable_basis(), &[c(1.0), c(1.0)]));
    let b = s.stable_basis();
    assert!((b.adjoint() * b - CMatrix::identity(1, 1)).norm() < 1e-14);
}

#[test]
fn burgers_stable_root_solves_the_characteristic_quadratic() {
    let (sys, p) = setup("burgers");
    let field = build_field(&sys.model, p, EvansVariant::Flux1d, &Frequency::one_d(c(1.0))).unwrap();
    let s = split(field.limit(true)).unwrap();
    assert_eq!(s.k_stable, 1);
    let root = (-1.0 - 5f64.sqrt()) / 2.0;
    assert!((s.stable.selected[0] - root).norm() < 1e-12, "{:?}", s.stable.selected);
}

#[test]
fn jordan_block_refuses_to_split() {
    let a = glancing_model(0.0, 0.3, Complex64::new(0.0, 0.3), &|x| x);
    assert!(a.iter().zip([0.0, 0.0, 1.0, 0.0]).all(|(z, e)| (z - e).norm() == 0.0));
    assert!(matches!(split(&a), Err(EvansError::SplittingFailure { .. })));
}

#[test]
fn glancing_model_examples() {
    let tau = |x: f64| 2.0 * x;
    let fix = GlancingFixture::linear(2.0);
    let (r, xi, lam) = (0.25, 0.4, Complex64::new(0.1, -0.7));
    assert_eq!(glancing_delta(r, xi, lam, &tau), fix.delta(r, xi, lam));
    assert_eq!(glancing_delta(r, xi, lam, &tau), lam - Complex64::new(0.0, 0.8) + 0.25);
    assert_eq!(glancing_model(r, xi, lam, &tau), fix.matrix(r, xi, lam));
    let mut eigs = linalg::eigenvalues(&glancing_model(0.0, 0.0, c(-1.0), &|x| x)).unwrap();
    eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
    assert!((eigs[0] + Complex64::i()).norm() < 1e-14 && (eigs[1] - Complex64::i()).norm() < 1e-14);
}

#[test]
fn glancing_branch_has_square_root_exponent() {
    let deltas: Vec<f64> = (0..=16).map(|k| 10f64.powf(-6.0 + 4.0 * k as f64 / 16.0)).collect();
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .map(|d| {
            let eigs = linalg::eigenvalues(&glancing_model(*d, 0.0, c(0.0), &|x| x)).unwrap();
            (d.ln(), eigs.iter().map(|z| z.norm()).fold(0.0, f64::max).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 0.5).abs() < 0.01, "slope {slope}");
}

#[test]
fn constant_path_keeps_the_basis() {
    let field = lagrangian_field();
    let path = vec![Frequency::one_d(Complex64::new(0.7, 0.2)); 6];
    let k = kato_continue(plus_limit(&field), &path, Flavor::Stable, None).unwrap();
    for r in &k.r {
        assert!((r - &k.r[0]).norm() <= 1e-14 * k.r[0].norm());
    }
    assert_eq!(k.inserted, 0);
}

#[test]
fn projector_and_range_conditions_hold_along_paths() {
    let field = lagrangian_field();
    let k = kato_continue(plus_limit(&field), &quarter_circle(24), Flavor::Stable, None).unwrap();
    for (p, r) in k.p.iter().zip(&k.r) {
        assert!((p * p - p).norm() <= 1e-12 * p.norm().max(1.0));
        assert!((p * r - r).norm() <= 1e-10 * r.norm().max(1.0));
        assert_eq!(r.ncols(), k.r[0].ncols());
    }
}

#[test]
fn kato_scheme_is_second_order() {
    let field = lagrangian_field();
    let end = |steps| {
        let k = kato_continue(plus_limit(&field), &quarter_circle(steps), Flavor::Stable, None).unwrap();
        assert_eq!(k.inserted, 0);
        k.r.last().unwrap().clone()
    };
    let ends: Vec<CMatrix> = [4, 8, 16, 32, 64].into_iter().map(end).collect();
    let defects: Vec<f64> = ends.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    for w in defects.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "defects {defects:?}");
    }
}

#[test]
fn kato_transport_closes_around_a_loop() {
    let field = lagrangian_field();
    let circle = |steps: usize| -> Vec<Frequency> {
        (0..=steps)
            .map(|j| Frequency::one_d(c(1.0) + Complex64::from_polar(0.5, 2.0 * PI * j as f64 / steps as f64)))
            .collect()
    };
    let coarse = kato_continue(plus_limit(&field), &circle(32), Flavor::Stable, None).unwrap();
    let fine = kato_continue(plus_limit(&field), &circle(3200), Flavor::Stable, None).unwrap();
    let step = 2.0 * PI * 0.5 / 32.0;
    let closure = |k: &KatoBasis| (k.r.last().unwrap() - &k.r[0]).norm() / k.r[0].norm();
    assert!(closure(&coarse) <= step * step, "coarse closure {}", closure(&coarse));
    assert!(closure(&fine) <= 1e-4 * step * step, "fine closure {}", closure(&fine));
    // halfway round, the coarse basis sits within O(step^2) of the fine one
    let mid = (&coarse.r[16] - &fine.r[1600]).norm() / fine.r[1600].norm();
    assert!(mid <= step * step, "midpoint defect {mid}");
}

#[test]
fn kato_through_glancing_point_is_discontinuous() {
    let fix = GlancingFixture::linear(1.0);
    let matrix_at = move |f: &Frequency| Ok(fix.matrix(0.0, 0.0, f.lambda));
    let path = vec![Frequency::one_d(c(1.0)), Frequency::one_d(c(-1.0))];
    let r = kato_continue(matrix_at, &path, Flavor::Stable, None);
    assert!(matches!(r, Err(EvansError::Discontinuity { .. })), "{r:?}");
}

#[test]
fn built_in_systems_split_consistently() {
    let cases: [(&str, Vec<EvansVariant>, Vec<f64>); 3] = [
        ("burgers", vec![EvansVariant::Integrated1d, EvansVariant::Flux1d, EvansVariant::BalancedFlux1d], vec![]),
        ("isentropic_lagrangian_1d", vec![EvansVariant::Integrated1d, EvansVariant::Flux1d, EvansVariant::BalancedFlux1d], vec![]),
        ("isentropic_eulerian_2d", vec![EvansVariant::FluxMd, EvansVariant::Bf, EvansVariant::Mbf], vec![0.5]),
    ];
    for (name, variants, xi) in cases {
        let (sys, p) = setup(name);
        for v in variants {
            for lam in [Complex64::new(0.1, 0.0), Complex64::new(0.5, 2.0), Complex64::new(3.0, -1.0)] {
                let f = build_field(&sys.model, p.clone(), v, &Frequency::new(lam, xi.clone())).unwrap();
                let (sp, sm) = (split(f.limit(true)).unwrap(), split(f.limit(false)).unwrap());
                assert_eq!(sp.k_stable + sm.k_unstable, f.big_n(), "{name} {v} {lam}");
            }
        }
    }
}

#[test]
fn conjugate_frequency_conjugates_the_projectors() {
    let field = lagrangian_field();
    let lam = Complex64::new(0.4, 1.3);
    let a = split(field.with_frequency(&Frequency::one_d(lam)).unwrap().limit(false)).unwrap();
    let b = split(field.with_frequency(&Frequency::one_d(lam.conj())).unwrap().limit(false)).unwrap();
    let pa = &a.unstable.projector;
    assert!((&b.unstable.projector - pa.map(|z| z.conj())).norm() < 1e-12 * pa.norm());
}

#[test]
fn eigenvalue_matching_follows_nearest_neighbours() {
    let prev = [c(1.0), c(-1.0), Complex64::new(0.0, 2.0)];
    let next = [Complex64::new(0.1, 2.0), c(-0.9), c(1.1)];
    assert_eq!(match_eigenvalues(&prev, &next), vec![2, 1, 0]);
}

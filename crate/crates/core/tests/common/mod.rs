//! Shared fixtures and an independent fixed-step Evans oracle.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use evans_core::bases;
use evans_core::evans::{build_field, EvansVariant};
use evans_core::formulations::Frequency;
use evans_core::linalg::{self, c, CMatrix};
use evans_core::profile::{solve_profile, ProfileOptions, ShockProfile};
use evans_core::systems::{self, ShockSystem};
use num_complex::Complex64;
use rayon::prelude::*;

pub fn setup(name: &str) -> (ShockSystem, Arc<ShockProfile>) {
    let sys = systems::shock(name).unwrap();
    let p = solve_profile(&sys.model, &sys.u_minus, &sys.u_plus, &ProfileOptions::default()).unwrap();
    (sys, Arc::new(p))
}

/// Specific volume of the Lagrangian profile from the scalar reduced equation
/// `v' = -(v / s)(p(v) - p(v-) + s^2 (v - v-))`, integrated by fine RK4 from
/// the midpoint value at `x = 0`.
pub fn lagrangian_volume(x_target: f64, s: f64, vm: f64, vp: f64, gamma: f64) -> f64 {
    let p = |v: f64| v.powf(-gamma);
    let f = |v: f64| -(v / s) * (p(v) - p(vm) + s * s * (v - vm));
    let mut v = 0.5 * (vm + vp);
    let steps = (x_target.abs() / 1e-3).ceil().max(1.0) as usize;
    let h = x_target / steps as f64;
    for _ in 0..steps {
        let k1 = f(v);
        let k2 = f(v + 0.5 * h * k1);
        let k3 = f(v + 0.5 * h * k2);
        let k4 = f(v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    v
}

/// Coefficients `A(x; lambda) = T0(x) + lambda T1(x)` tabulated at the
/// half-step nodes of a fixed RK4 grid from each end to `x = 0`.
pub struct DenseOracle {
    steps: usize,
    plus: Vec<(CMatrix, CMatrix)>,
    minus: Vec<(CMatrix, CMatrix)>,
    lim_plus: (CMatrix, CMatrix),
    lim_minus: (CMatrix, CMatrix),
    x_plus: f64,
    x_minus: f64,
}

fn affine(a1: &CMatrix, a2: &CMatrix) -> (CMatrix, CMatrix) {
    let t1 = a2 - a1;
    (a1 - &t1, t1)
}

impl DenseOracle {
    /// Tabulates a 1D variant, checking that it is affine in `lambda`.
    pub fn new(sys: &ShockSystem, p: Arc<ShockProfile>, variant: EvansVariant, steps: usize) -> Self {
        let f1 = build_field(&sys.model, p.clone(), variant, &Frequency::one_d(c(1.0))).unwrap();
        let f2 = build_field(&sys.model, p.clone(), variant, &Frequency::one_d(c(2.0))).unwrap();
        let f3 = build_field(&sys.model, p.clone(), variant, &Frequency::one_d(Complex64::new(0.5, 3.0))).unwrap();
        let table = |x_end: f64| -> Vec<(CMatrix, CMatrix)> {
            (0..=2 * steps)
                .map(|i| {
                    let x = x_end * (1.0 - i as f64 / (2 * steps) as f64);
                    affine(&f1.eval(x), &f2.eval(x))
                })
                .collect()
        };
        let (x_plus, x_minus) = (p.x_max(), p.x_min());
        let plus = table(x_plus);
        let minus = table(x_minus);
        let (t0, t1) = &plus[steps];
        let probe = t0 + t1 * Complex64::new(0.5, 3.0);
        let direct = f3.eval(x_plus * 0.5);
        assert!((probe - direct).norm() < 1e-10 * (1.0 + t0.norm()), "coefficients are not affine in lambda");
        let lim_plus = affine(f1.limit(true), f2.limit(true));
        let lim_minus = affine(f1.limit(false), f2.limit(false));
        Self { steps, plus, minus, lim_plus, lim_minus, x_plus, x_minus }
    }

    /// Decaying-group flags at one end: sign of the real part away from the
    /// origin, and for the slow modes near the origin the sign of `Re(mu / lambda)`.
    fn flags(lambda: Complex64, eigs: &[Complex64], plus: bool) -> Vec<bool> {
        let fast_scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        eigs.iter()
            .map(|z| {
                let key = if lambda.norm() < 0.05 && z.norm() < 0.2 * fast_scale.max(1e-300) && z.norm() < 0.5 {
                    (z / lambda).re
                } else {
                    z.re
                };
                if plus {
                    key < 0.0
                } else {
                    key > 0.0
                }
            })
            .collect()
    }

    fn side(&self, lambda: Complex64, plus: bool, reference: &mut Option<CMatrix>) -> (CMatrix, Complex64) {
        let (l0, l1) = if plus { &self.lim_plus } else { &self.lim_minus };
        let a = l0 + l1 * lambda;
        let sub = linalg::invariant_subspace(&a, |e| Self::flags(lambda, e, plus)).unwrap();
        let e = reference.get_or_insert_with(|| {
            bases::selector(a.nrows(), &bases::pivot_columns(&sub.projector, sub.dim()))
        });
        (&sub.projector * &*e, sub.trace())
    }

    /// Fixed-step RK4 from the end to `x = 0` with exponential rescaling and
    /// QR every few steps; returns `(Q, log|det|, phase)`.
    fn integrate(&self, lambda: Complex64, basis: &CMatrix, trace: Complex64, plus: bool) -> (CMatrix, f64, Complex64) {
        let table = if plus { &self.plus } else { &self.minus };
        let x_end = if plus { self.x_plus } else { self.x_minus };
        let k = basis.ncols();
        let n = basis.nrows();
        let qr = basis.clone().qr();
        let mut y = qr.q();
        let r = qr.r();
        let det: Complex64 = (0..k).map(|i| r[(i, i)]).product();
        let mut log_mod = det.norm().ln();
        let mut phase = det / det.norm();
        let shift = trace.re / k as f64;
        let h = -x_end / self.steps as f64;
        let hc = c(h);
        let mat = |i: usize| {
            let (t0, t1) = &table[i];
            let mut a = t0 + t1 * lambda;
            for d in 0..n {
                a[(d, d)] -= shift;
            }
            a
        };
        for s in 0..self.steps {
            let (a0, am, a1) = (mat(2 * s), mat(2 * s + 1), mat(2 * s + 2));
            let k1 = &a0 * &y;
            let k2 = &am * (&y + &k1 * (hc * 0.5));
            let k3 = &am * (&y + &k2 * (hc * 0.5));
            let k4 = &a1 * (&y + &k3 * hc);
            y += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / 6.0);
            if s % 8 == 7 || s + 1 == self.steps {
                let qr = y.clone().qr();
                let r = qr.r();
                let det: Complex64 = (0..k).map(|i| r[(i, i)]).product();
                log_mod += det.norm().ln();
                phase *= det / det.norm();
                y = qr.q();
            }
        }
        phase *= Complex64::from_polar(1.0, trace.im * x_end);
        (y, log_mod, phase)
    }

    /// `(value, log_scale)` with `D = value exp(log_scale)`, using bases
    /// `P E` with `E` fixed by the first call through `refs`.
    pub fn evaluate_with(&self, lambda: Complex64, refs: &mut (Option<CMatrix>, Option<CMatrix>)) -> (Complex64, f64) {
        let (bp, sp) = self.side(lambda, true, &mut refs.0);
        let (bm, sm) = self.side(lambda, false, &mut refs.1);
        let (qp, lp, php) = self.integrate(lambda, &bp, sp, true);
        let (qm, lm, phm) = self.integrate(lambda, &bm, sm, false);
        let n = qp.nrows();
        let mut mat = CMatrix::zeros(n, n);
        mat.columns_mut(0, qp.ncols()).copy_from(&qp);
        mat.columns_mut(qp.ncols(), qm.ncols()).copy_from(&qm);
        (mat.determinant() * php * phm, lp + lm)
    }

    pub fn evaluate(&self, lambda: Complex64) -> Complex64 {
        let (v, l) = self.evaluate_with(lambda, &mut (None, None));
        v * l.exp()
    }

    /// Winding number of `D` on a circle from a dense phase sum.
    pub fn winding(&self, center: Complex64, radius: f64, count: usize) -> (i64, f64) {
        let mut refs = (None, None);
        // fix references at the starting point, then sample in parallel
        let start = center + radius;
        let _ = self.evaluate_with(start, &mut refs);
        let refs = refs;
        let values: Vec<Complex64> = (0..count)
            .into_par_iter()
            .map(|j| {
                let lam = center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / count as f64);
                let mut r = refs.clone();
                self.evaluate_with(lam, &mut r).0
            })
            .collect();
        let total: f64 = (0..count).map(|j| (values[(j + 1) % count] / values[j]).arg()).sum();
        let max_step = (0..count).map(|j| (values[(j + 1) % count] / values[j]).arg().abs()).fold(0.0, f64::max);
        assert!(max_step < 0.5 * PI, "dense oracle under-resolved: phase step {max_step}");
        let turns = total / (2.0 * PI);
        (turns.round() as i64, turns)
    }
}

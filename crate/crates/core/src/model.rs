//! System class: temporal and spatial fluxes, their Jacobians, the viscosity
//! blocks, and checks of the structural hypotheses on a given shock.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{EvansError, Result};
use crate::linalg::{self, Partition};

/// A system `f^0(U)_t + sum_j f^j(U)_{x_j} = sum_{j,k} (B^{jk}(U) U_{x_k})_{x_j}`.
///
/// Spatial indices `j, k` run over `1..=d`; index 0 in `flux`/`jacobian`
/// denotes the temporal flux. Viscosity matrices are full `n x n` with zero
/// first block row.
pub trait ConservationLaw: Send + Sync + fmt::Debug {
    fn state_dim(&self) -> usize;
    fn hyperbolic_dim(&self) -> usize;
    fn space_dim(&self) -> usize;
    fn flux(&self, j: usize, u: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, j: usize, u: &DVector<f64>) -> DMatrix<f64>;
    fn viscosity(&self, j: usize, k: usize, u: &DVector<f64>) -> DMatrix<f64>;
    /// Directional derivative `dB^{jk}(u)[dir]`.
    fn viscosity_derivative(
        &self,
        j: usize,
        k: usize,
        u: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> DMatrix<f64>;
    /// Whether `B^{11}` carries a nonzero lower-left block (one space dimension only).
    fn has_lower_left_viscosity(&self) -> bool {
        false
    }
}

/// A conservation law together with a shock speed.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub law: Arc<dyn ConservationLaw>,
    pub speed: f64,
}

impl SystemModel {
    pub fn new(law: Arc<dyn ConservationLaw>, speed: f64) -> Self {
        Self { law, speed }
    }

    pub fn n(&self) -> usize {
        self.law.state_dim()
    }

    pub fn r(&self) -> usize {
        self.law.hyperbolic_dim()
    }

    pub fn d(&self) -> usize {
        self.law.space_dim()
    }

    /// Size `2n - r` of the first-order eigenvalue system.
    pub fn big_n(&self) -> usize {
        2 * self.n() - self.r()
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.n(), self.r())
    }

    pub fn b21_present(&self) -> bool {
        self.law.has_lower_left_viscosity()
    }

    /// Shifted flux `f^1 - s f^0`.
    pub fn shifted_flux(&self, u: &DVector<f64>) -> DVector<f64> {
        self.law.flux(1, u) - self.law.flux(0, u) * self.speed
    }

    /// `A^1 - s A^0`.
    pub fn shifted_jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        self.law.jacobian(1, u) - self.law.jacobian(0, u) * self.speed
    }

    /// Lower-right block of `B^{jk}`.
    pub fn viscosity_block(&self, j: usize, k: usize, u: &DVector<f64>) -> DMatrix<f64> {
        self.partition().b22(&self.law.viscosity(j, k, u))
    }

    /// The matrix whose invertibility is (H1), or its modified form when
    /// `B^{11}` has a lower-left block.
    pub fn h1_matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let p = self.partition();
        let a = self.shifted_jacobian(u);
        let a11 = p.b11(&a);
        if !self.b21_present() {
            return Ok(a11);
        }
        let b = self.law.viscosity(1, 1, u);
        let b22inv = linalg::inverse_real(&p.b22(&b)).ok_or_else(|| {
            EvansError::DegenerateViscosity { state: u.iter().cloned().collect() }
        })?;
        Ok(a11 - p.b12(&a) * b22inv * p.b21(&b))
    }
}

/// Characteristic counts at the end states and the resulting shock type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShockClassification {
    pub i_plus: usize,
    pub i_minus: usize,
    pub i: usize,
    pub o: usize,
    pub c: i64,
    pub kind: ShockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockKind {
    Lax,
    Undercompressive,
    Overcompressive,
}

/// `det(A^1_11 - s A^0_11)` at `state`; 1 when there is no hyperbolic block.
pub fn check_h1(model: &SystemModel, state: &DVector<f64>) -> Result<f64> {
    if model.r() == 0 {
        return Ok(1.0);
    }
    Ok(model.h1_matrix(state)?.determinant())
}

/// Unit directions in `R^d` used to sample the parabolicity condition.
pub fn sample_directions(d: usize, samples: usize) -> Vec<Vec<f64>> {
    let samples = samples.max(1);
    match d {
        1 => vec![vec![1.0]],
        2 => (0..samples)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / samples as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..samples)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / samples as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::new();
            for i in 0..samples {
                let mut v: Vec<f64> =
                    (0..d).map(|k| ((i * (k + 1)) as f64 * 0.754_877_666 + k as f64).sin()).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                v.iter_mut().for_each(|x| *x /= norm);
                out.push(v);
            }
            out
        }
    }
}

/// Minimum over sampled unit directions of the smallest real part of the
/// spectrum of `sum eta_j eta_k b^{jk}(state)`.
pub fn check_h2(model: &SystemModel, state: &DVector<f64>, samples: usize) -> f64 {
    let d = model.d();
    let m = model.n() - model.r();
    let mut best = f64::INFINITY;
    for eta in sample_directions(d, samples) {
        let mut b = DMatrix::<f64>::zeros(m, m);
        for j in 0..d {
            for k in 0..d {
                b += model.viscosity_block(j + 1, k + 1, state) * (eta[j] * eta[k]);
            }
        }
        let eigs = linalg::eigenvalues(&linalg::to_complex(&b)).unwrap_or_default();
        for e in eigs {
            best = best.min(e.re);
        }
    }
    best
}

/// Max-norm of the Rankine–Hugoniot defect `f~(U+) - f~(U-)`.
pub fn check_rh(model: &SystemModel, u_minus: &DVector<f64>, u_plus: &DVector<f64>) -> f64 {
    (model.shifted_flux(u_plus) - model.shifted_flux(u_minus)).amax()
}

/// Characteristic speeds of `(A^0)^{-1}(A^1 - s A^0)` at `u`, sorted.
pub fn characteristic_speeds(model: &SystemModel, u: &DVector<f64>) -> Result<Vec<f64>> {
    let a0inv = linalg::inverse_real(&model.law.jacobian(0, u))
        .ok_or_else(|| EvansError::InvalidInput("temporal Jacobian A^0 is singular".into()))?;
    let m = a0inv * model.shifted_jacobian(u);
    let mut speeds: Vec<f64> = linalg::eigenvalues(&linalg::to_complex(&m))?
        .into_iter()
        .map(|z: Complex64| z.re)
        .collect();
    speeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(speeds)
}

pub fn classify(
    model: &SystemModel,
    u_minus: &DVector<f64>,
    u_plus: &DVector<f64>,
) -> Result<ShockClassification> {
    let n = model.n();
    let minus = characteristic_speeds(model, u_minus)?;
    let plus = characteristic_speeds(model, u_plus)?;
    let smax = minus.iter().chain(plus.iter()).fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-8 * (1.0 + smax);
    for (side, speeds) in [("minus", &minus), ("plus", &plus)] {
        if let Some(&v) = speeds.iter().find(|v| v.abs() < tol) {
            return Err(EvansError::CharacteristicShock { side, speed: v });
        }
    }
    let i_minus = minus.iter().filter(|v| **v > 0.0).count();
    let i_plus = plus.iter().filter(|v| **v < 0.0).count();
    let i = i_minus + i_plus;
    let o = 2 * n - i;
    let kind = if i == n + 1 {
        ShockKind::Lax
    } else if i <= n {
        ShockKind::Undercompressive
    } else {
        ShockKind::Overcompressive
    };
    Ok(ShockClassification { i_plus, i_minus, i, o, c: i as i64 - o as i64, kind })
}

/// Largest relative discrepancy between the analytic Jacobians `A^j` and
/// central differences of the fluxes at `u`.
pub fn jacobian_defect(model: &SystemModel, u: &DVector<f64>, step: f64) -> f64 {
    let n = model.n();
    let mut worst = 0.0f64;
    for j in 0..=model.d() {
        let exact = model.law.jacobian(j, u);
        let mut fd = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let h = step * (1.0 + u[k].abs());
            let mut up = u.clone();
            let mut dn = u.clone();
            up[k] += h;
            dn[k] -= h;
            let col = (model.law.flux(j, &up) - model.law.flux(j, &dn)) / (2.0 * h);
            fd.set_column(k, &col);
        }
        let scale = 1.0 + exact.amax();
        worst = worst.max((fd - exact).amax() / scale);
    }
    worst
}

/// Largest relative discrepancy between `dB^{jk}(u)[dir]` and central
/// differences of `B^{jk}` along `dir`.
pub fn viscosity_derivative_defect(
    model: &SystemModel,
    u: &DVector<f64>,
    dir: &DVector<f64>,
    step: f64,
) -> f64 {
    let d = model.d();
    let mut worst = 0.0f64;
    for j in 1..=d {
        for k in 1..=d {
            let exact = model.law.viscosity_derivative(j, k, u, dir);
            let fd = (model.law.viscosity(j, k, &(u + dir * step))
                - model.law.viscosity(j, k, &(u - dir * step)))
                / (2.0 * step);
            worst = worst.max((fd - &exact).amax() / (1.0 + exact.amax()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct DiagViscosity;

    impl ConservationLaw for DiagViscosity {
        fn state_dim(&self) -> usize {
            2
        }
        fn hyperbolic_dim(&self) -> usize {
            0
        }
        fn space_dim(&self) -> usize {
            1
        }
        fn flux(&self, j: usize, u: &DVector<f64>) -> DVector<f64> {
            if j == 0 {
                u.clone()
            } else {
                u * 0.5
            }
        }
        fn jacobian(&self, j: usize, _u: &DVector<f64>) -> DMatrix<f64> {
            if j == 0 {
                DMatrix::identity(2, 2)
            } else {
                DMatrix::identity(2, 2) * 0.5
            }
        }
        fn viscosity(&self, _j: usize, _k: usize, _u: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]))
        }
        fn viscosity_derivative(
            &self,
            _j: usize,
            _k: usize,
            _u: &DVector<f64>,
            _dir: &DVector<f64>,
        ) -> DMatrix<f64> {
            DMatrix::zeros(2, 2)
        }
    }

    #[test]
    fn h2_reports_negative_viscosity() {
        let model = SystemModel::new(Arc::new(DiagViscosity), 0.0);
        let v = check_h2(&model, &DVector::from_vec(vec![0.0, 0.0]), 64);
        assert!((v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn direction_samples_are_unit() {
        for d in 1..=4 {
            for v in sample_directions(d, 64) {
                let norm: f64 = v.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }
}

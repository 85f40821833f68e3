//! Inviscid Lopatinski determinant and the low-frequency limit of the
//! balanced-flux Evans function.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bases;
use crate::error::{EvansError, Result};
use crate::evans::{self, EvansInit, EvansOptions, SideBasis};
use crate::formulations::{self, linearized_at, CoefficientField};
use crate::linalg::{self, c, CMatrix, I};
use crate::model::SystemModel;
use crate::profile::ShockProfile;

/// Eigenprojector norm above which an angle is treated as glancing.
pub const GLANCING_NORM: f64 = 1e6;

/// Unit direction `(lambda_check, xi_check)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    pub lambda: Complex64,
    pub xi: Vec<f64>,
}

impl Angle {
    /// Normalizes `(lambda, xi)` to the unit sphere.
    pub fn new(lambda: Complex64, xi: Vec<f64>) -> Result<Self> {
        let r = (lambda.norm_sqr() + xi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if r == 0.0 {
            return Err(EvansError::AngleRequired);
        }
        Ok(Self { lambda: lambda / r, xi: xi.iter().map(|x| x / r).collect() })
    }
}

/// Symbol `-(lambda A^0 + i sum xi_j A^j)(A^1 - s A^0)^{-1}` of the inviscid
/// problem in flux variables at a constant state.
pub fn inviscid_symbol(model: &SystemModel, u: &DVector<f64>, angle: &Angle) -> Result<CMatrix> {
    let lin = linearized_at(model, u, &DVector::zeros(model.n()));
    let mut m = linalg::to_complex(&lin.a0) * angle.lambda;
    for (jj, x) in angle.xi.iter().enumerate() {
        m += linalg::to_complex(&lin.a[jj + 1]) * (I * *x);
    }
    let a1inv = linalg::inverse(&linalg::to_complex(&lin.a[0]))
        .ok_or(EvansError::CharacteristicShock { side: "end", speed: 0.0 })?;
    Ok(-(m * a1inv))
}

/// Outgoing inviscid modes at both end states in flux variables and the
/// front jump vector.
#[derive(Debug, Clone)]
pub struct InviscidModes {
    /// `P_+ E_+`: stable modes of the symbol at `U+`.
    pub phi_plus: CMatrix,
    /// `P_- E_-`: unstable modes of the symbol at `U-`.
    pub phi_minus: CMatrix,
    /// `lambda [f^0] + i sum xi_j [f^j]`, `[g] = g(U+) - g(U-)`.
    pub jump: DVector<Complex64>,
    /// Largest spectral projector norm encountered.
    pub projector_norm: f64,
}

impl InviscidModes {
    pub fn matrix(&self) -> CMatrix {
        let n = self.jump.len();
        let (kp, km) = (self.phi_plus.ncols(), self.phi_minus.ncols());
        let mut out = CMatrix::zeros(n, n);
        out.columns_mut(0, kp).copy_from(&self.phi_plus);
        out.columns_mut(kp, km).copy_from(&self.phi_minus);
        out.set_column(kp + km, &self.jump);
        out
    }
}

pub fn inviscid_modes(
    model: &SystemModel,
    u_minus: &DVector<f64>,
    u_plus: &DVector<f64>,
    angle: &Angle,
) -> Result<InviscidModes> {
    if angle.lambda.re < 0.0 {
        return Err(EvansError::InvalidInput("Lopatinski angle needs Re lambda >= 0".into()));
    }
    if angle.xi.len() + 1 != model.d() {
        return Err(EvansError::InvalidInput(format!(
            "angle has {} transverse components, expected {}",
            angle.xi.len(),
            model.d() - 1
        )));
    }
    let n = model.n();
    let mut norm: f64 = 0.0;
    let mut side = |u: &DVector<f64>, stable: bool| -> Result<CMatrix> {
        let m = inviscid_symbol(model, u, angle)?;
        let s = bases::split(&m).map_err(|e| match e {
            EvansError::SplittingFailure { .. } => EvansError::Glancing { norm: f64::INFINITY },
            other => other,
        })?;
        let sub = if stable { s.stable } else { s.unstable };
        let pn = linalg::norm2(&sub.projector);
        norm = norm.max(pn);
        if pn > GLANCING_NORM {
            return Err(EvansError::Glancing { norm: pn });
        }
        bases::projected_basis(&sub.projector, sub.dim(), None)
    };
    let phi_plus = side(u_plus, true)?;
    let phi_minus = side(u_minus, false)?;
    if phi_plus.ncols() + phi_minus.ncols() + 1 != n {
        return Err(EvansError::InvalidInput(format!(
            "{} + {} outgoing modes: the Lopatinski determinant needs a Lax shock",
            phi_plus.ncols(),
            phi_minus.ncols()
        )));
    }
    let law = &model.law;
    let mut jump = (law.flux(0, u_plus) - law.flux(0, u_minus)).map(c) * angle.lambda;
    for (jj, x) in angle.xi.iter().enumerate() {
        jump += (law.flux(jj + 2, u_plus) - law.flux(jj + 2, u_minus)).map(c) * (I * *x);
    }
    Ok(InviscidModes { phi_plus, phi_minus, jump, projector_norm: norm })
}

/// `Delta(lambda_check, xi_check) = det(P_+ E_+, P_- E_-, jump)`.
pub fn lopatinski_det(
    model: &SystemModel,
    u_minus: &DVector<f64>,
    u_plus: &DVector<f64>,
    angle: &Angle,
) -> Result<Complex64> {
    Ok(linalg::determinant(&inviscid_modes(model, u_minus, u_plus, angle)?.matrix()))
}

/// Balanced-flux field at scale `r` and the given angle.
pub fn bf_field(model: &SystemModel, p: Arc<ShockProfile>, angle: &Angle, r: f64) -> Result<CoefficientField> {
    let xi: Vec<Complex64> = angle.xi.iter().map(|x| c(*x)).collect();
    formulations::build_sharp_md(model, p, c(r), angle.lambda, &xi)
}

/// Initializing bases for the balanced-flux field at small scale: slow columns
/// `P_slow (Phi, 0)` from the inviscid modes and fast columns `P_fast (0, W)`
/// from the profile's linearized ODE, so that the limit `r -> 0` of the Evans
/// function factors through the Lopatinski determinant.
pub fn slow_fast_init(field: &CoefficientField, modes: &InviscidModes) -> Result<EvansInit> {
    let part = field.partition();
    let (n, m) = (part.n(), part.m);
    let big = field.big_n();
    let at_zero = {
        let xi: Vec<Complex64> = field.freq.xi.iter().map(|_| c(0.0)).collect();
        formulations::build_sharp_md(&field.model, field.profile.clone(), c(0.0), c(1.0), &xi)?
    };
    let side = |plus: bool, phi: &CMatrix| -> Result<SideBasis> {
        let a = field.limit(plus);
        let eigs = linalg::eigenvalues(a)?;
        let mut order: Vec<usize> = (0..big).collect();
        order.sort_by(|&i, &j| eigs[i].norm().total_cmp(&eigs[j].norm()));
        let mut slow = vec![false; big];
        for &i in order.iter().take(n) {
            slow[i] = true;
        }
        let largest_slow = order.iter().take(n).map(|&i| eigs[i].norm()).fold(0.0, f64::max);
        let smallest_fast = order.iter().skip(n).map(|&i| eigs[i].norm()).fold(f64::INFINITY, f64::min);
        if largest_slow * 10.0 > smallest_fast {
            return Err(EvansError::InvalidInput(format!(
                "scale too large for slow/fast separation: |mu_slow| {largest_slow:.3e}, |mu_fast| {smallest_fast:.3e}"
            )));
        }
        let decays = |z: &Complex64| if plus { z.re < 0.0 } else { z.re > 0.0 };
        let pick = |want_slow: bool| {
            let eigs = eigs.clone();
            let slow = slow.clone();
            move |e: &[Complex64]| -> Vec<bool> {
                let perm = bases::match_eigenvalues(&eigs, e);
                let mut out = vec![false; e.len()];
                for (i, &j) in perm.iter().enumerate() {
                    out[j] = slow[i] == want_slow && decays(&eigs[i]);
                }
                out
            }
        };
        let ss = linalg::invariant_subspace(a, pick(true))?;
        let fs = linalg::invariant_subspace(a, pick(false))?;
        if ss.dim() != phi.ncols() {
            return Err(EvansError::InvalidInput(format!(
                "{} slow decaying modes but {} outgoing inviscid modes",
                ss.dim(),
                phi.ncols()
            )));
        }
        let mut slow_ref = CMatrix::zeros(big, phi.ncols());
        slow_ref.view_mut((0, 0), (n, phi.ncols())).copy_from(phi);
        // fast reference from the profile ODE block at zero scale
        let e = at_zero.limit(plus).view((n, n), (m, m)).into_owned();
        let sub = linalg::invariant_subspace(&e, |z| z.iter().map(decays).collect())?;
        if sub.dim() != fs.dim() {
            return Err(EvansError::InvalidInput("fast mode count changed with the scale".into()));
        }
        let w = bases::projected_basis(&sub.projector, sub.dim(), None)?;
        let mut fast_ref = CMatrix::zeros(big, w.ncols());
        fast_ref.view_mut((n, 0), (m, w.ncols())).copy_from(&w);
        let slow_cols = &ss.projector * slow_ref;
        let fast_cols = &fs.projector * fast_ref;
        let mut basis = CMatrix::zeros(big, slow_cols.ncols() + fast_cols.ncols());
        basis.columns_mut(0, slow_cols.ncols()).copy_from(&slow_cols);
        basis.columns_mut(slow_cols.ncols(), fast_cols.ncols()).copy_from(&fast_cols);
        Ok(SideBasis { basis, trace: ss.trace() + fs.trace() })
    };
    Ok(EvansInit { plus: side(true, &modes.phi_plus)?, minus: side(false, &modes.phi_minus)? })
}

/// Low-frequency data per angle and the resulting transversality estimates.
#[derive(Debug, Clone)]
pub struct LowFrequencyFit {
    pub angles: Vec<Angle>,
    pub radii: Vec<f64>,
    pub delta_values: Vec<Complex64>,
    /// `D_bf(r lambda_check, r xi_check)` per angle and radius.
    pub d_values: Vec<Vec<Complex64>>,
    /// `D_bf` extrapolated to `r = 0` per angle.
    pub limits: Vec<Complex64>,
    /// `limit / Delta`, `None` where `Delta` vanishes.
    pub gamma_estimates: Vec<Option<Complex64>>,
    /// Angles at which `Delta = 0` (inviscid instability).
    pub flagged: Vec<usize>,
    /// `max |gamma_i - mean| / |mean|`.
    pub spread: f64,
}

impl LowFrequencyFit {
    /// Per-angle table `Re l, Im l, xi..., Re Delta, Im Delta, Re gamma, Im gamma`.
    pub fn to_table(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("# re_lambda im_lambda xi... re_delta im_delta re_gamma im_gamma\n");
        for (i, a) in self.angles.iter().enumerate() {
            let _ = write!(s, "{:.12e} {:.12e}", a.lambda.re, a.lambda.im);
            for x in &a.xi {
                let _ = write!(s, " {:.12e}", x);
            }
            let g = self.gamma_estimates[i].unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let d = self.delta_values[i];
            let _ = writeln!(s, " {:.12e} {:.12e} {:.12e} {:.12e}", d.re, d.im, g.re, g.im);
        }
        let _ = writeln!(s, "# spread {:.6e}", self.spread);
        s
    }
}

/// Polynomial extrapolation of `values(radii)` to `r = 0` (Neville).
pub fn extrapolate_to_zero(radii: &[f64], values: &[Complex64]) -> Complex64 {
    let mut p = values.to_vec();
    let k = p.len();
    for level in 1..k {
        for i in 0..(k - level) {
            let (ri, rj) = (radii[i], radii[i + level]);
            p[i] = (p[i + 1] * ri - p[i] * rj) / (ri - rj);
        }
    }
    p[0]
}

/// Extrapolates each angle's values, checks convergence and forms `gamma`.
pub fn fit_from_values(
    angles: Vec<Angle>,
    radii: Vec<f64>,
    delta_values: Vec<Complex64>,
    d_values: Vec<Vec<Complex64>>,
) -> Result<LowFrequencyFit> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) || radii[radii.len() - 1] <= 0.0 {
        return Err(EvansError::InvalidInput("radii must be positive and strictly decreasing".into()));
    }
    let mut limits = Vec::new();
    let mut gammas = Vec::new();
    let mut flagged = Vec::new();
    for (i, vals) in d_values.iter().enumerate() {
        let lim = extrapolate_to_zero(&radii, vals);
        if radii.len() >= 3 {
            let k = radii.len();
            let lower = extrapolate_to_zero(&radii[1..], &vals[1..k]);
            let rel = (lower - lim).norm() / lim.norm().max(1e-300);
            if !(rel < 1e-2) {
                return Err(EvansError::Fit(format!("extrapolation at angle {i} not converged (rel change {rel:.3e})")));
            }
        }
        limits.push(lim);
        let delta = delta_values[i];
        if delta.norm() <= 1e-12 * lim.norm().max(1.0) {
            flagged.push(i);
            gammas.push(None);
        } else {
            gammas.push(Some(lim / delta));
        }
    }
    let valid: Vec<Complex64> = gammas.iter().flatten().copied().collect();
    let spread = if valid.is_empty() {
        f64::NAN
    } else {
        let mean = valid.iter().sum::<Complex64>() / valid.len() as f64;
        valid.iter().map(|g| (g - mean).norm() / mean.norm()).fold(0.0, f64::max)
    };
    Ok(LowFrequencyFit { angles, radii, delta_values, d_values, limits, gamma_estimates: gammas, flagged, spread })
}

/// `D_bf` at small radii along each angle with slow/fast bases, extrapolated
/// to `r = 0` and divided by the Lopatinski determinant.
pub fn fit_low_frequency(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    angles: &[Angle],
    radii: &[f64],
    opts: &EvansOptions,
) -> Result<LowFrequencyFit> {
    let per_angle: Vec<Result<(Complex64, Vec<Complex64>)>> = angles
        .par_iter()
        .map(|angle| {
            let modes = inviscid_modes(model, &p.u_minus, &p.u_plus, angle)?;
            let delta = linalg::determinant(&modes.matrix());
            let mut vals = Vec::with_capacity(radii.len());
            for &r in radii {
                let field = bf_field(model, p.clone(), angle, r)?;
                let init = slow_fast_init(&field, &modes)?;
                vals.push(evans::evaluate(&field, &init, opts)?.d());
            }
            Ok((delta, vals))
        })
        .collect();
    let mut deltas = Vec::new();
    let mut values = Vec::new();
    for r in per_angle {
        let (d, v) = r?;
        deltas.push(d);
        values.push(v);
    }
    fit_from_values(angles.to_vec(), radii.to_vec(), deltas, values)
}

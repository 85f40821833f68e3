//! Standing viscous shock profiles: `B^{11}(U) U' = f~(U) - f~(U-)`.
//!
//! The hyperbolic unknowns are eliminated through the algebraic rows by a
//! per-node Newton solve, and the parabolic unknowns solve a boundary-value
//! problem on `[-L, L]` by Hermite–Simpson collocation with boundary
//! conditions projected onto the end-state stable/unstable subspaces.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::banded::Banded;
use crate::error::{EvansError, Result};
use crate::linalg::{self, Partition};
use crate::model::{check_rh, SystemModel};

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    /// Half-length `L` of the domain; chosen from the end-state decay rates if `None`.
    pub half_length: Option<f64>,
    pub nodes: usize,
    /// Newton tolerance for the collocation system.
    pub tol: f64,
    /// Allowed distance of `U(+-L)` from `U+-`, relative to the jump.
    pub tail_tol: f64,
    /// Abscissa at which the phase condition is imposed.
    pub phase_point: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { half_length: None, nodes: 401, tol: 1e-11, tail_tol: 1e-6, phase_point: 0.0 }
    }
}

/// A computed profile on a graded grid.
#[derive(Debug, Clone)]
pub struct ShockProfile {
    pub grid: Vec<f64>,
    pub values: Vec<DVector<f64>>,
    pub derivative: Vec<DVector<f64>>,
    pub second_derivative: Vec<DVector<f64>>,
    pub u_minus: DVector<f64>,
    pub u_plus: DVector<f64>,
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub half_length: f64,
    pub phase_point: f64,
    pub decay_reliable: bool,
}

/// Exponential tail rates fitted from a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub nu_minus: f64,
    pub nu_plus: f64,
    /// False when a tail window is too short, not monotone, or not decaying.
    pub reliable: bool,
}

impl ShockProfile {
    /// Builds a profile from sampled values and derivatives; second
    /// derivatives are estimated by differencing the derivatives.
    pub fn from_samples(
        grid: Vec<f64>,
        values: Vec<DVector<f64>>,
        derivative: Vec<DVector<f64>>,
        u_minus: DVector<f64>,
        u_plus: DVector<f64>,
    ) -> Result<Self> {
        let k = grid.len();
        if k < 2 || values.len() != k || derivative.len() != k {
            return Err(EvansError::InvalidInput("profile samples have mismatched lengths".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EvansError::InvalidInput("profile grid must be strictly increasing".into()));
        }
        let second_derivative = difference_derivatives(&grid, &derivative);
        let half_length = grid[k - 1].max(-grid[0]);
        let mut p = ShockProfile {
            grid,
            values,
            derivative,
            second_derivative,
            u_minus,
            u_plus,
            nu_minus: f64::NAN,
            nu_plus: f64::NAN,
            half_length,
            phase_point: 0.0,
            decay_reliable: false,
        };
        let fit = fit_decay_rates(&p);
        p.nu_minus = fit.nu_minus;
        p.nu_plus = fit.nu_plus;
        p.decay_reliable = fit.reliable;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.u_minus.len()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn x_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    fn locate(&self, x: f64) -> usize {
        let k = self.grid.partition_point(|g| *g <= x);
        k.clamp(1, self.grid.len() - 1) - 1
    }

    /// Interpolated `(U, U')` at `x`; end states with zero slope outside the grid.
    pub fn eval(&self, x: f64) -> (DVector<f64>, DVector<f64>) {
        let n = self.n();
        if x <= self.x_min() {
            return (self.u_minus.clone(), DVector::zeros(n));
        }
        if x >= self.x_max() {
            return (self.u_plus.clone(), DVector::zeros(n));
        }
        let i = self.locate(x);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        // quintic Hermite for values, cubic Hermite for slopes
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let (u0, u1) = (&self.values[i], &self.values[i + 1]);
        let (d0, d1) = (&self.derivative[i], &self.derivative[i + 1]);
        let (s0, s1) = (&self.second_derivative[i], &self.second_derivative[i + 1]);
        let u = u0 * h0 + d0 * (h * h1) + s0 * (h * h * h2) + s1 * (h * h * h3) + d1 * (h * h4) + u1 * h5;
        let c0 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let c1 = t3 - 2.0 * t2 + t;
        let c2 = -2.0 * t3 + 3.0 * t2;
        let c3 = t3 - t2;
        let du = d0 * c0 + s0 * (h * c1) + d1 * c2 + s1 * (h * c3);
        (u, du)
    }

    /// Columnar text: header lines starting with `#`, then one row per node
    /// with `x`, `U`, `U'`, `U''`.
    pub fn to_columns(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let join = |v: &DVector<f64>| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "# n: {n}");
        let _ = writeln!(out, "# u_minus: {}", join(&self.u_minus));
        let _ = writeln!(out, "# u_plus: {}", join(&self.u_plus));
        let _ = writeln!(out, "# nu: {:.17e} {:.17e}", self.nu_minus, self.nu_plus);
        let _ = writeln!(out, "# half_length: {:.17e}", self.half_length);
        let _ = writeln!(out, "# phase_point: {:.17e}", self.phase_point);
        let mut cols = vec!["x".to_string()];
        cols.extend((0..n).map(|k| format!("u{k}")));
        cols.extend((0..n).map(|k| format!("du{k}")));
        cols.extend((0..n).map(|k| format!("ddu{k}")));
        let _ = writeln!(out, "# {}", cols.join(" "));
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.17e} {} {} {}",
                self.grid[i],
                join(&self.values[i]),
                join(&self.derivative[i]),
                join(&self.second_derivative[i])
            );
        }
        out
    }

    pub fn from_columns(text: &str) -> Result<Self> {
        let bad = |m: &str| EvansError::InvalidInput(format!("profile file: {m}"));
        let parse_vec = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect()
        };
        let mut n = None;
        let mut u_minus = None;
        let mut u_plus = None;
        let mut nu = None;
        let mut half_length = None;
        let mut phase_point = 0.0;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut derivative = Vec::new();
        let mut second = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, val)) = rest.split_once(':') {
                    match key.trim() {
                        "n" => n = Some(val.trim().parse::<usize>().map_err(|_| bad("n"))?),
                        "u_minus" => u_minus = Some(parse_vec(val)?),
                        "u_plus" => u_plus = Some(parse_vec(val)?),
                        "nu" => nu = Some(parse_vec(val)?),
                        "half_length" => half_length = parse_vec(val)?.first().copied(),
                        "phase_point" => phase_point = parse_vec(val)?.first().copied().unwrap_or(0.0),
                        _ => {}
                    }
                }
                continue;
            }
            let n = n.ok_or_else(|| bad("missing n"))?;
            let row = parse_vec(line)?;
            if row.len() != 1 + 3 * n {
                return Err(bad("row has wrong width"));
            }
            grid.push(row[0]);
            values.push(DVector::from_column_slice(&row[1..1 + n]));
            derivative.push(DVector::from_column_slice(&row[1 + n..1 + 2 * n]));
            second.push(DVector::from_column_slice(&row[1 + 2 * n..1 + 3 * n]));
        }
        let u_minus = DVector::from_vec(u_minus.ok_or_else(|| bad("missing u_minus"))?);
        let u_plus = DVector::from_vec(u_plus.ok_or_else(|| bad("missing u_plus"))?);
        let nu = nu.ok_or_else(|| bad("missing nu"))?;
        if grid.len() < 2 || nu.len() != 2 {
            return Err(bad("too few rows"));
        }
        let half_length = half_length.unwrap_or(grid[grid.len() - 1]);
        let mut p = ShockProfile {
            grid,
            values,
            derivative,
            second_derivative: second,
            u_minus,
            u_plus,
            nu_minus: nu[0],
            nu_plus: nu[1],
            half_length,
            phase_point,
            decay_reliable: true,
        };
        p.decay_reliable = fit_decay_rates(&p).reliable;
        Ok(p)
    }
}

fn difference_derivatives(grid: &[f64], d: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let k = grid.len();
    (0..k)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == k - 1 {
                (k - 2, k - 1)
            } else {
                (i - 1, i + 1)
            };
            (&d[b] - &d[a]) / (grid[b] - grid[a])
        })
        .collect()
}

/// Graded grid on `[-L, L]` clustered at `center`, containing `center` as a node.
pub fn graded_grid(half_length: f64, center: f64, nodes: usize, grading: f64) -> Vec<f64> {
    let left = center + half_length;
    let right = half_length - center;
    let intervals = nodes.max(3) - 1;
    let mut nl = ((intervals as f64) * left / (left + right)).round() as usize;
    nl = nl.clamp(1, intervals - 1);
    let nr = intervals - nl;
    let map = |t: f64| (grading * t).sinh() / grading.sinh();
    let mut grid = Vec::with_capacity(nodes);
    for k in (1..=nl).rev() {
        grid.push(center - left * map(k as f64 / nl as f64));
    }
    grid.push(center);
    for k in 1..=nr {
        grid.push(center + right * map(k as f64 / nr as f64));
    }
    grid
}

/// Reduced profile dynamics in the parabolic unknowns.
struct Reduced<'a> {
    model: &'a SystemModel,
    part: Partition,
    u_minus: DVector<f64>,
    u_plus: DVector<f64>,
    f_minus: DVector<f64>,
}

impl<'a> Reduced<'a> {
    fn new(model: &'a SystemModel, u_minus: &DVector<f64>, u_plus: &DVector<f64>) -> Self {
        Self {
            model,
            part: model.partition(),
            u_minus: u_minus.clone(),
            u_plus: u_plus.clone(),
            f_minus: model.shifted_flux(u_minus),
        }
    }

    fn assemble(&self, u1: &DVector<f64>, u2: &DVector<f64>) -> DVector<f64> {
        let mut u = DVector::zeros(self.part.n());
        u.rows_mut(0, self.part.r).copy_from(u1);
        u.rows_mut(self.part.r, self.part.m).copy_from(u2);
        u
    }

    /// Solves the algebraic rows `f~_1(u1, u2) = f~_1(U-)` for `u1`.
    fn lift(&self, u2: &DVector<f64>, x: f64) -> Result<DVector<f64>> {
        let p = self.part;
        if p.r == 0 {
            return Ok(u2.clone());
        }
        let d2 = p.tail(&self.u_plus) - p.tail(&self.u_minus);
        let denom = d2.norm_squared();
        let t = if denom > 0.0 {
            ((u2 - p.tail(&self.u_minus)).dot(&d2) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut u1 = p.head(&self.u_minus) * (1.0 - t) + p.head(&self.u_plus) * t;
        let target = p.head(&self.f_minus);
        let scale = 1.0 + target.amax();
        for _ in 0..60 {
            let u = self.assemble(&u1, u2);
            let res = p.head(&self.model.shifted_flux(&u)) - &target;
            if res.amax() <= 1e-15 * scale {
                return Ok(u);
            }
            let a11 = p.b11(&self.model.shifted_jacobian(&u));
            let step = a11
                .lu()
                .solve(&res)
                .ok_or(EvansError::NoninvertibleHyperbolicBlock { x })?;
            u1 -= &step;
            if step.amax() <= 1e-15 * (1.0 + u1.amax()) {
                return Ok(self.assemble(&u1, u2));
            }
        }
        let u = self.assemble(&u1, u2);
        let res = p.head(&self.model.shifted_flux(&u)) - &target;
        if res.amax() <= 1e-11 * scale {
            Ok(u)
        } else {
            Err(EvansError::NoninvertibleHyperbolicBlock { x })
        }
    }

    /// `M = b22 - b21 A~11^{-1} A~12` and `A~11^{-1} A~12` at `u`.
    fn reduced_viscosity(&self, u: &DVector<f64>, x: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let p = self.part;
        let b = self.model.law.viscosity(1, 1, u);
        let a = self.model.shifted_jacobian(u);
        let k = if p.r == 0 {
            DMatrix::zeros(0, p.m)
        } else {
            linalg::inverse_real(&p.b11(&a)).ok_or(EvansError::NoninvertibleHyperbolicBlock { x })?
                * p.b12(&a)
        };
        let m = p.b22(&b) - p.b21(&b) * &k;
        Ok((m, k))
    }

    /// `(U, U')` on the slow manifold above `u2`.
    fn field(&self, u2: &DVector<f64>, x: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let p = self.part;
        let u = self.lift(u2, x)?;
        let (m, k) = self.reduced_viscosity(&u, x)?;
        let rhs = p.tail(&self.model.shifted_flux(&u)) - p.tail(&self.f_minus);
        let du2 = m.lu().solve(&rhs).ok_or_else(|| EvansError::DegenerateViscosity {
            state: u.iter().cloned().collect(),
        })?;
        let du1 = -(&k * &du2);
        Ok((u, self.assemble(&du1, &du2)))
    }

    fn rhs(&self, u2: &DVector<f64>, x: f64) -> Result<DVector<f64>> {
        let (_, du) = self.field(u2, x)?;
        Ok(self.part.tail(&du))
    }

    /// Jacobian of the reduced vector field at a rest point.
    fn linearization(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let p = self.part;
        let a = self.model.shifted_jacobian(u);
        let (m, k) = self.reduced_viscosity(u, f64::NAN)?;
        let schur = p.b22(&a) - p.b21(&a) * &k;
        m.lu().solve(&schur).ok_or_else(|| EvansError::DegenerateViscosity {
            state: u.iter().cloned().collect(),
        })
    }
}

/// Rows of a left annihilator of the subspace selected from `j`'s spectrum,
/// together with the selected eigenvalues.
fn boundary_rows(j: &DMatrix<f64>, keep_unstable: bool) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = j.nrows();
    let jc = linalg::to_complex(j);
    let eigs = linalg::eigenvalues(&jc)?;
    let scale = 1.0 + j.amax();
    if eigs.iter().any(|e| e.re.abs() < 1e-10 * scale) {
        return Err(EvansError::NoConnection(
            "end state is not a hyperbolic rest point of the profile equation".into(),
        ));
    }
    // the complement of the manifold leaving or entering the rest point
    let sub = linalg::invariant_subspace(&jc, |e| {
        e.iter().map(|z| if keep_unstable { z.re < 0.0 } else { z.re > 0.0 }).collect()
    })?;
    let p_real = sub.projector.map(|z| z.re);
    let rows = if sub.dim() == 0 {
        DMatrix::zeros(0, m)
    } else {
        linalg::real_range_basis(&p_real.transpose(), 1e-10).transpose()
    };
    let rates: Vec<f64> = eigs
        .iter()
        .filter(|z| if keep_unstable { z.re > 0.0 } else { z.re < 0.0 })
        .map(|z| z.re.abs())
        .collect();
    Ok((rows, rates))
}

/// Computes the profile connecting `u_minus` to `u_plus`.
pub fn solve_profile(
    model: &SystemModel,
    u_minus: &DVector<f64>,
    u_plus: &DVector<f64>,
    opts: &ProfileOptions,
) -> Result<ShockProfile> {
    let n = model.n();
    if u_minus.len() != n || u_plus.len() != n {
        return Err(EvansError::InvalidInput("end states have the wrong dimension".into()));
    }
    if opts.nodes < 16 || !(opts.tol > 0.0) || !(opts.tail_tol > 0.0) {
        return Err(EvansError::InvalidInput("need nodes >= 16 and positive tolerances".into()));
    }
    let jump = (u_plus - u_minus).amax();
    if jump == 0.0 {
        return Err(EvansError::NoConnection(
            "equal end states admit only the constant solution".into(),
        ));
    }
    let rh = check_rh(model, u_minus, u_plus);
    if rh > 1e-10 * (1.0 + model.shifted_flux(u_minus).amax()) {
        return Err(EvansError::InvalidInput(format!(
            "end states violate the Rankine–Hugoniot condition by {rh:.3e}"
        )));
    }
    let red = Reduced::new(model, u_minus, u_plus);
    let part = red.part;
    let m = part.m;
    if m == 0 {
        return Err(EvansError::InvalidInput("no parabolic unknowns".into()));
    }

    let (rows_minus, rates_minus) = boundary_rows(&red.linearization(u_minus)?, true)?;
    let (rows_plus, rates_plus) = boundary_rows(&red.linearization(u_plus)?, false)?;
    if rates_minus.len() + rates_plus.len() != m + 1 {
        return Err(EvansError::NoConnection(format!(
            "unstable dimension {} at U- plus stable dimension {} at U+ must equal {}",
            rates_minus.len(),
            rates_plus.len(),
            m + 1
        )));
    }
    let nu_minus_lin = rates_minus.iter().cloned().fold(f64::INFINITY, f64::min);
    let nu_plus_lin = rates_plus.iter().cloned().fold(f64::INFINITY, f64::min);
    let half_length = opts
        .half_length
        .unwrap_or_else(|| (1e10f64).ln() / nu_minus_lin.min(nu_plus_lin) + opts.phase_point.abs());
    if !(half_length > opts.phase_point.abs()) {
        return Err(EvansError::InvalidInput("phase point must lie inside the domain".into()));
    }

    let grid = graded_grid(half_length, opts.phase_point, opts.nodes, 2.5);
    let nodes = grid.len();
    let phase_node = grid.iter().position(|x| *x == opts.phase_point).unwrap();
    let u2m = part.tail(u_minus);
    let u2p = part.tail(u_plus);
    let d2 = &u2p - &u2m;
    let phase_comp = d2.iamax();
    if d2[phase_comp].abs() < 1e-14 * (1.0 + jump) {
        return Err(EvansError::NoConnection("parabolic unknowns do not jump".into()));
    }
    let phase_value = 0.5 * (u2m[phase_comp] + u2p[phase_comp]);

    let q_left = rows_minus.nrows();
    let q_right = rows_plus.nrows();
    let size = nodes * m;
    debug_assert_eq!(q_left + q_right + 1 + (nodes - 1) * m, size);

    let phase_row = q_left + phase_node * m;
    // row offset of interval i
    let interval_row = |i: usize| q_left + i * m + usize::from(i >= phase_node);

    let residual = |z: &[f64]| -> Result<Vec<f64>> {
        let node = |i: usize| DVector::from_column_slice(&z[i * m..(i + 1) * m]);
        let mut out = vec![0.0; size];
        let left = &rows_minus * (node(0) - &u2m);
        out[..q_left].copy_from_slice(left.as_slice());
        let mut f_prev = red.rhs(&node(0), grid[0])?;
        for i in 0..nodes - 1 {
            let h = grid[i + 1] - grid[i];
            let (ua, ub) = (node(i), node(i + 1));
            let f_next = red.rhs(&ub, grid[i + 1])?;
            let mid = (&ua + &ub) * 0.5 + (&f_prev - &f_next) * (h / 8.0);
            let f_mid = red.rhs(&mid, grid[i] + 0.5 * h)?;
            let def = &ub - &ua - (&f_prev + &f_mid * 4.0 + &f_next) * (h / 6.0);
            let row = interval_row(i);
            out[row..row + m].copy_from_slice(def.as_slice());
            f_prev = f_next;
        }
        out[phase_row] = z[phase_node * m + phase_comp] - phase_value;
        let right = &rows_plus * (node(nodes - 1) - &u2p);
        out[size - q_right..].copy_from_slice(right.as_slice());
        Ok(out)
    };

    // tanh initial guess centred at the phase point
    let rate = 0.5 * (nu_minus_lin.min(4.0) + nu_plus_lin.min(4.0)) * 0.5;
    let mut z = vec![0.0; size];
    for (i, x) in grid.iter().enumerate() {
        let t = 0.5 * (1.0 + ((x - opts.phase_point) * rate).tanh());
        for k in 0..m {
            z[i * m + k] = u2m[k] + t * d2[k];
        }
    }

    let band = 2 * m + 1;
    let mut g = residual(&z)?;
    let mut gnorm = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zscale = 1.0 + u2m.amax().max(u2p.amax());
    let mut converged = false;
    for _iter in 0..60 {
        let jac = collocation_jacobian(&residual, &z, &g, nodes, m, band, &|i| {
            let mut rows = Vec::new();
            if i == 0 {
                rows.extend(0..q_left);
            }
            if i > 0 {
                let r = interval_row(i - 1);
                rows.extend(r..r + m);
            }
            if i + 1 < nodes {
                let r = interval_row(i);
                rows.extend(r..r + m);
            }
            if i == phase_node {
                rows.push(phase_row);
            }
            if i == nodes - 1 {
                rows.extend(size - q_right..size);
            }
            rows
        })?;
        let mut step: Vec<f64> = g.clone();
        jac.solve(&mut step)?;
        let step_norm = step.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, b)| a - alpha * b).collect();
            if let Ok(gt) = residual(&trial) {
                let gt_norm = gt.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if gt_norm.is_finite() && (gt_norm < gnorm || gt_norm < 1e-14 * zscale) {
                    z = trial;
                    g = gt;
                    gnorm = gt_norm;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        if alpha == 1.0 && step_norm <= opts.tol * zscale {
            converged = true;
            break;
        }
    }
    if !converged || gnorm > 1e-8 * zscale {
        return Err(EvansError::NoConnection(format!(
            "collocation Newton did not converge (residual {gnorm:.3e})"
        )));
    }

    let mut values = Vec::with_capacity(nodes);
    let mut derivative = Vec::with_capacity(nodes);
    let mut second = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let u2 = DVector::from_column_slice(&z[i * m..(i + 1) * m]);
        let (u, du) = red.field(&u2, grid[i])?;
        let f2 = part.tail(&du);
        let fnorm = f2.amax();
        let dd = if fnorm > 0.0 {
            let eps = 1e-5 * (1.0 + u2.amax()) / fnorm;
            let (_, up) = red.field(&(&u2 + &f2 * eps), grid[i])?;
            let (_, dn) = red.field(&(&u2 - &f2 * eps), grid[i])?;
            (up - dn) / (2.0 * eps)
        } else {
            DVector::zeros(n)
        };
        values.push(u);
        derivative.push(du);
        second.push(dd);
    }

    let tail = (&values[0] - u_minus).amax().max((&values[nodes - 1] - u_plus).amax());
    let allowed = opts.tail_tol * jump;
    if tail > allowed {
        let nu = nu_minus_lin.min(nu_plus_lin);
        let suggested = half_length + (tail / allowed).ln() / nu + 1.0;
        return Err(EvansError::DomainTooShort { residual: tail, suggested });
    }
    let mut p = ShockProfile {
        grid,
        values,
        derivative,
        second_derivative: second,
        u_minus: u_minus.clone(),
        u_plus: u_plus.clone(),
        nu_minus: nu_minus_lin,
        nu_plus: nu_plus_lin,
        half_length,
        phase_point: opts.phase_point,
        decay_reliable: false,
    };
    let fit = fit_decay_rates(&p);
    p.decay_reliable = fit.reliable;
    if fit.reliable {
        p.nu_minus = fit.nu_minus;
        p.nu_plus = fit.nu_plus;
    }
    Ok(p)
}

/// Finite-difference Jacobian of the collocation residual using a three-colouring
/// of the nodes (each node couples only to its neighbours).
fn collocation_jacobian<F, R>(
    residual: &F,
    z: &[f64],
    g: &[f64],
    nodes: usize,
    m: usize,
    band: usize,
    rows_of: &R,
) -> Result<Banded>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    R: Fn(usize) -> Vec<usize>,
{
    let size = nodes * m;
    let mut jac = Banded::zeros(size, band, band);
    for color in 0..3 {
        for k in 0..m {
            let mut zp = z.to_vec();
            let mut steps = vec![0.0; nodes];
            let mut i = color;
            while i < nodes {
                let h = 1e-7 * (1.0 + z[i * m + k].abs());
                zp[i * m + k] += h;
                steps[i] = h;
                i += 3;
            }
            let gp = residual(&zp)?;
            let mut i = color;
            while i < nodes {
                let col = i * m + k;
                for row in rows_of(i) {
                    let v = (gp[row] - g[row]) / steps[i];
                    if v != 0.0 {
                        jac.set(row, col, v);
                    }
                }
                i += 3;
            }
        }
    }
    Ok(jac)
}

/// Max over nodes of `|B^{11}(U) U' - (f~(U) - f~(U-))|`.
pub fn profile_residual(model: &SystemModel, p: &ShockProfile) -> f64 {
    let fm = model.shifted_flux(&p.u_minus);
    p.values
        .iter()
        .zip(&p.derivative)
        .map(|(u, du)| {
            (model.law.viscosity(1, 1, u) * du - (model.shifted_flux(u) - &fm)).amax()
        })
        .fold(0.0, f64::max)
}

/// Max of the same residual at the quarter points of every grid interval,
/// using the interpolated profile; measures discretization error.
pub fn interpolation_defect(model: &SystemModel, p: &ShockProfile) -> f64 {
    let fm = model.shifted_flux(&p.u_minus);
    let mut worst = 0.0f64;
    for w in p.grid.windows(2) {
        for frac in [0.25, 0.75] {
            let x = w[0] + frac * (w[1] - w[0]);
            let (u, du) = p.eval(x);
            let r = (model.law.viscosity(1, 1, &u) * du - (model.shifted_flux(&u) - &fm)).amax();
            worst = worst.max(r);
        }
    }
    worst
}

/// Least-squares decay rates of `|U - U+-|` over the tail windows where the
/// relative distance lies in `[1e-11, 1e-3]`.
pub fn fit_decay_rates(p: &ShockProfile) -> DecayFit {
    let scale = (&p.u_plus - &p.u_minus).amax().max(1e-300);
    let fit_side = |target: &DVector<f64>, sign: f64| -> (f64, bool) {
        let pts: Vec<(f64, f64)> = p
            .grid
            .iter()
            .zip(&p.values)
            .map(|(x, u)| (*x, (u - target).amax() / scale))
            .filter(|(x, d)| *d >= 1e-11 && *d <= 1e-3 && sign * (*x - p.phase_point) > 0.0)
            .collect();
        if pts.len() < 8 {
            return (f64::NAN, false);
        }
        // distance must shrink moving outward
        let monotone = pts.windows(2).all(|w| {
            if sign > 0.0 {
                w[1].1 <= w[0].1
            } else {
                w[1].1 >= w[0].1
            }
        });
        let k = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / k;
        let my = pts.iter().map(|q| q.1.ln()).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1.ln() - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let nu = -sign * slope;
        (nu, monotone && nu > 0.0 && nu.is_finite())
    };
    let (nu_minus, ok_m) = fit_side(&p.u_minus, -1.0);
    let (nu_plus, ok_p) = fit_side(&p.u_plus, 1.0);
    DecayFit { nu_minus, nu_plus, reliable: ok_m && ok_p }
}

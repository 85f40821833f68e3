//! Adaptive Dormand–Prince 5(4) integration of complex matrix ODEs.

use num_complex::Complex64;

use crate::error::{EvansError, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-11, max_steps: 200_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful integrator that carries its step size across calls.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub opts: OdeOptions,
    h: Option<f64>,
    pub steps: usize,
    pub rejected: usize,
}

fn axpy(out: &mut CMatrix, terms: &[(f64, &CMatrix)], base: &CMatrix, h: f64) {
    out.copy_from(base);
    for (c, k) in terms {
        if *c != 0.0 {
            out.zip_apply(*k, |o, v| *o += v * (c * h));
        }
    }
}

impl Dopri5 {
    pub fn new(opts: OdeOptions) -> Self {
        Self { opts, h: None, steps: 0, rejected: 0 }
    }

    /// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
    pub fn integrate<F>(&mut self, mut f: F, x0: f64, x1: f64, y0: CMatrix) -> Result<CMatrix>
    where
        F: FnMut(f64, &CMatrix) -> CMatrix,
    {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = match self.h {
            Some(h) => h.abs().min(span.abs()),
            None => self.initial_step(&y, &k1, span.abs()),
        };
        let (r, cdim) = (y.nrows(), y.ncols());
        let mut tmp = CMatrix::zeros(r, cdim);
        let mut ynew = CMatrix::zeros(r, cdim);
        let mut local_steps = 0usize;
        while (x1 - x) * dir > 0.0 {
            if local_steps >= self.opts.max_steps {
                return Err(EvansError::Accuracy(format!("step budget exhausted at x = {x:.6}")));
            }
            local_steps += 1;
            let last = h >= (x1 - x).abs() * (1.0 - 1e-12);
            if last {
                h = (x1 - x).abs();
            }
            let hs = h * dir;
            axpy(&mut tmp, &[(A21, &k1)], &y, hs);
            let k2 = f(x + C2 * hs, &tmp);
            axpy(&mut tmp, &[(A31, &k1), (A32, &k2)], &y, hs);
            let k3 = f(x + C3 * hs, &tmp);
            axpy(&mut tmp, &[(A41, &k1), (A42, &k2), (A43, &k3)], &y, hs);
            let k4 = f(x + C4 * hs, &tmp);
            axpy(&mut tmp, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &y, hs);
            let k5 = f(x + C5 * hs, &tmp);
            axpy(&mut tmp, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &y, hs);
            let k6 = f(x + hs, &tmp);
            axpy(&mut ynew, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], &y, hs);
            let k7 = f(x + hs, &ynew);
            let mut err2 = 0.0;
            for i in 0..r {
                for j in 0..cdim {
                    let e: Complex64 = (k1[(i, j)] * E1
                        + k3[(i, j)] * E3
                        + k4[(i, j)] * E4
                        + k5[(i, j)] * E5
                        + k6[(i, j)] * E6
                        + k7[(i, j)] * E7)
                        * hs;
                    let sc = self.opts.atol + self.opts.rtol * y[(i, j)].norm().max(ynew[(i, j)].norm());
                    err2 += (e.norm() / sc).powi(2);
                }
            }
            let err = (err2 / (r * cdim).max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(EvansError::Accuracy(format!("non-finite solution near x = {x:.6}")));
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + hs };
                std::mem::swap(&mut y, &mut ynew);
                k1 = k7;
                self.steps += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h *= fac;
                } else {
                    self.h = Some(h * fac);
                }
            } else {
                self.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-13 * span.abs().max(1.0) {
                    return Err(EvansError::Accuracy(format!("step size underflow near x = {x:.6}")));
                }
            }
        }
        if self.h.is_none() {
            self.h = Some(h);
        }
        Ok(y)
    }

    fn initial_step(&self, y: &CMatrix, f0: &CMatrix, span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (a, b) in y.iter().zip(f0.iter()) {
            let sc = self.opts.atol + self.opts.rtol * a.norm();
            d0 += (a.norm() / sc).powi(2);
            d1 += (b.norm() / sc).powi(2);
        }
        let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * (d0 / d1).sqrt() };
        h.clamp(1e-8, span).min(0.1)
    }
}

/// Classical fourth-order Runge–Kutta with a fixed step count.
pub fn rk4_fixed<F>(mut f: F, x0: f64, x1: f64, y0: CMatrix, steps: usize) -> CMatrix
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    let h = (x1 - x0) / steps as f64;
    let mut y = y0;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x, &y);
        let k2 = f(x + 0.5 * h, &(&y + &k1 * Complex64::new(0.5 * h, 0.0)));
        let k3 = f(x + 0.5 * h, &(&y + &k2 * Complex64::new(0.5 * h, 0.0)));
        let k4 = f(x + h, &(&y + &k3 * Complex64::new(h, 0.0)));
        y += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0);
        x += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn exponential_growth_and_decay() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
        let y0 = CMatrix::from_row_slice(2, 1, &[c(1.0), c(0.0)]);
        let mut ode = Dopri5::new(OdeOptions::default());
        let y = ode.integrate(|_, y| &a * y, 0.0, 10.0, y0.clone()).unwrap();
        assert!((y[(0, 0)] - c(10f64.cos())).norm() < 1e-8);
        let back = ode.integrate(|_, y| &a * y, 10.0, 0.0, y).unwrap();
        assert!((back - y0).norm() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let f = |x: f64, y: &CMatrix| y * c(x.cos());
        let exact = 1f64.sin().exp();
        let y0 = CMatrix::from_element(1, 1, c(1.0));
        let e1 = (rk4_fixed(f, 0.0, 1.0, y0.clone(), 10)[(0, 0)].re - exact).abs();
        let e2 = (rk4_fixed(f, 0.0, 1.0, y0, 20)[(0, 0)].re - exact).abs();
        assert!(e1 / e2 > 12.0);
    }
}

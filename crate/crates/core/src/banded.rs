//! Banded LU factorization with partial pivoting for the collocation Newton
//! systems.

use crate::error::{EvansError, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored row-wise
/// with room for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Stores an entry; panics if it lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    fn col_range(&self, i: usize) -> (usize, usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.width - self.kl).min(self.n);
        (lo, hi)
    }

    /// Solves `A x = b` in place, consuming the factorization.
    pub fn solve(mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in (k + 1)..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > 1e-18 * scale) {
                return Err(EvansError::Linalg("singular banded matrix".into()));
            }
            if piv != k {
                let (_, hi) = self.col_range(k);
                for j in k..hi {
                    let a = self.get(k, j);
                    let c = self.get(piv, j);
                    self.set(k, j, c);
                    if self.slot(piv, j).is_some() {
                        self.set(piv, j, a);
                    } else if a != 0.0 {
                        return Err(EvansError::Linalg("band overflow during pivoting".into()));
                    }
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            let (_, hi) = self.col_range(k);
            for i in (k + 1)..=last {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in (k + 1)..hi {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        let s = self.slot(i, j).expect("fill-in within band");
                        self.data[s] -= f * v;
                    }
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let (_, hi) = self.col_range(k);
            let mut s = b[k];
            for (j, bj) in b.iter().enumerate().take(hi).skip(k + 1) {
                s -= self.get(k, j) * bj;
            }
            b[k] = s / self.get(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve_with_pivoting() {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut band = Banded::zeros(n, kl, ku);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                // small diagonal forces row exchanges
                let v = if i == j { 1e-3 } else { ((i * 5 + j * 3) as f64).sin() };
                band.set(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut x = rhs.clone();
        band.solve(&mut x).unwrap();
        let exact = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-9 * (1.0 + exact[i].abs()));
        }
    }
}

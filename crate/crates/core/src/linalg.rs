//! Dense complex linear algebra used throughout the crate: block partitions,
//! reordered Schur forms, invariant subspaces and their spectral projectors.

use nalgebra::{DMatrix, DVector, Scalar};
use num_complex::Complex64;

use crate::error::{EvansError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn to_complex_vec(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(c)
}

/// Row/column partition `(r, n - r)` of an `n x n` matrix into hyperbolic and
/// parabolic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub r: usize,
    pub m: usize,
}

impl Partition {
    pub fn new(n: usize, r: usize) -> Self {
        Self { r, m: n - r }
    }

    pub fn n(&self) -> usize {
        self.r + self.m
    }

    pub fn b11<T: Scalar>(&self, a: &DMatrix<T>) -> DMatrix<T> {
        a.view((0, 0), (self.r, self.r)).into_owned()
    }

    pub fn b12<T: Scalar>(&self, a: &DMatrix<T>) -> DMatrix<T> {
        a.view((0, self.r), (self.r, self.m)).into_owned()
    }

    pub fn b21<T: Scalar>(&self, a: &DMatrix<T>) -> DMatrix<T> {
        a.view((self.r, 0), (self.m, self.r)).into_owned()
    }

    pub fn b22<T: Scalar>(&self, a: &DMatrix<T>) -> DMatrix<T> {
        a.view((self.r, self.r), (self.m, self.m)).into_owned()
    }

    pub fn head<T: Scalar>(&self, v: &DVector<T>) -> DVector<T> {
        v.rows(0, self.r).into_owned()
    }

    pub fn tail<T: Scalar>(&self, v: &DVector<T>) -> DVector<T> {
        v.rows(self.r, self.m).into_owned()
    }
}

/// Inverse that maps an empty matrix to itself and reports singularity.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

pub fn inverse_real(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return c(1.0);
    }
    m.determinant()
}

/// Complex Schur decomposition `m = q t q^*` with `t` upper triangular.
pub fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((m.clone(), m.clone()));
    }
    let scale = m.norm().max(1.0);
    let decomp = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON * scale, 10_000)
        .ok_or_else(|| EvansError::Linalg("Schur iteration did not converge".into()))?;
    let (q, mut t) = decomp.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = c(0.0);
        }
    }
    Ok((q, t))
}

pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m)?;
    Ok((0..m.nrows()).map(|i| t[(i, i)]).collect())
}

/// Swaps the adjacent diagonal entries `k`, `k + 1` of the triangular factor
/// by a Givens rotation, updating the Schur vectors.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let off = t[(k, k + 1)];
    let (v1, v2) = (off, b - a);
    let norm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (g11, g21) = (v1 / norm, v2 / norm);
    let (g12, g22) = (-g21.conj(), g11.conj());
    let n = t.nrows();
    // rows k, k+1 <- G^* rows
    for j in 0..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = g11.conj() * x + g21.conj() * y;
        t[(k + 1, j)] = g12.conj() * x + g22.conj() * y;
    }
    // columns k, k+1 <- columns G
    for i in 0..n {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * g11 + y * g21;
        t[(i, k + 1)] = x * g12 + y * g22;
        let x = q[(i, k)];
        let y = q[(i, k + 1)];
        q[(i, k)] = x * g11 + y * g21;
        q[(i, k + 1)] = x * g12 + y * g22;
    }
    t[(k + 1, k)] = c(0.0);
}

/// Reorders a Schur form so that the eigenvalues flagged in `select` (indexed
/// by their current diagonal position) come first. Returns the number selected.
pub fn reorder_schur(q: &mut CMatrix, t: &mut CMatrix, select: &[bool]) -> usize {
    let n = t.nrows();
    let mut flags = select.to_vec();
    let mut filled = 0;
    for i in 0..n {
        if flags[i] {
            let mut pos = i;
            while pos > filled {
                swap_adjacent(q, t, pos - 1);
                flags.swap(pos - 1, pos);
                pos -= 1;
            }
            filled += 1;
        }
    }
    filled
}

/// Solves `t11 y - y t22 = rhs` for upper-triangular `t11`, `t22`.
pub fn sylvester_triangular(t11: &CMatrix, t22: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let k = t11.nrows();
    let m = t22.nrows();
    let mut y = CMatrix::zeros(k, m);
    let scale = t11.norm().max(t22.norm()).max(1.0);
    for j in 0..m {
        let mut col: Vec<Complex64> = (0..k).map(|i| rhs[(i, j)]).collect();
        for l in 0..j {
            for i in 0..k {
                col[i] += y[(i, l)] * t22[(l, j)];
            }
        }
        let shift = t22[(j, j)];
        for i in (0..k).rev() {
            let mut s = col[i];
            for l in (i + 1)..k {
                s -= t11[(i, l)] * y[(l, j)];
            }
            let d = t11[(i, i)] - shift;
            if d.norm() <= 1e-14 * scale {
                return Err(EvansError::Linalg(
                    "invariant subspaces share an eigenvalue".into(),
                ));
            }
            y[(i, j)] = s / d;
        }
    }
    Ok(y)
}

/// Invariant subspace of a matrix for a selected group of eigenvalues,
/// together with its spectral projector along the complementary group.
#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    /// Orthonormal basis, `N x k`.
    pub basis: CMatrix,
    /// Spectral projector onto the subspace along the complementary one.
    pub projector: CMatrix,
    /// Eigenvalues of the group.
    pub selected: Vec<Complex64>,
    /// Eigenvalues of the complementary group.
    pub rest: Vec<Complex64>,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.selected.len()
    }

    /// Trace of the restriction of the matrix to the subspace.
    pub fn trace(&self) -> Complex64 {
        self.selected.iter().sum()
    }
}

/// Builds the invariant subspace for the eigenvalues picked by `select` from
/// the Schur diagonal.
pub fn invariant_subspace<F>(m: &CMatrix, select: F) -> Result<InvariantSubspace>
where
    F: FnOnce(&[Complex64]) -> Vec<bool>,
{
    let n = m.nrows();
    let (mut q, mut t) = schur(m)?;
    let eigs: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let flags = select(&eigs);
    let k = reorder_schur(&mut q, &mut t, &flags);
    let selected: Vec<Complex64> = (0..k).map(|i| t[(i, i)]).collect();
    let rest: Vec<Complex64> = (k..n).map(|i| t[(i, i)]).collect();
    let t11 = t.view((0, 0), (k, k)).into_owned();
    let t12 = t.view((0, k), (k, n - k)).into_owned();
    let t22 = t.view((k, k), (n - k, n - k)).into_owned();
    let y = sylvester_triangular(&t11, &t22, &(-t12))?;
    let mut core = CMatrix::zeros(n, n);
    for i in 0..k {
        core[(i, i)] = c(1.0);
        for j in k..n {
            core[(i, j)] = -y[(i, j - k)];
        }
    }
    let projector = &q * core * q.adjoint();
    let basis = q.columns(0, k).into_owned();
    Ok(InvariantSubspace { basis, projector, selected, rest })
}

/// Orthonormalizes the columns of `m` by Householder QR, returning `(Q, det R)`.
pub fn orthonormalize(m: &CMatrix) -> (CMatrix, Complex64) {
    let k = m.ncols();
    if k == 0 {
        return (m.clone(), c(1.0));
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let det: Complex64 = (0..k).map(|i| r[(i, i)]).product();
    (qr.q(), det)
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the column space of a real matrix (singular values
/// above `tol` relative to the largest).
pub fn real_range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * smax.max(1e-300))
        .collect();
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| u[(i, cols[j])])
}

/// Maximum absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 3) as f64 * 0.37 + seed;
            Complex64::new(x.sin() * 2.0, (x * 1.3).cos())
        })
    }

    #[test]
    fn reordered_schur_is_similarity() {
        let a = sample(5, 0.2);
        let (mut q, mut t) = schur(&a).unwrap();
        let flags: Vec<bool> = (0..5).map(|i| t[(i, i)].re < 0.0).collect();
        let k = reorder_schur(&mut q, &mut t, &flags);
        assert_eq!(k, flags.iter().filter(|f| **f).count());
        let back = &q * &t * q.adjoint();
        assert!((back - &a).norm() < 1e-12);
        for i in 0..k {
            assert!(t[(i, i)].re < 0.0);
        }
        for i in k..5 {
            assert!(t[(i, i)].re >= 0.0);
        }
    }

    #[test]
    fn projector_is_idempotent_and_invariant() {
        let a = sample(6, 1.1);
        let sub = invariant_subspace(&a, |e| e.iter().map(|z| z.re < 0.3).collect()).unwrap();
        let p = &sub.projector;
        assert!((p * p - p).norm() < 1e-11);
        // A commutes with its spectral projector
        assert!((&a * p - p * &a).norm() < 1e-10);
        assert!((p * &sub.basis - &sub.basis).norm() < 1e-11);
        let tr: Complex64 = (p * &a).trace();
        assert!((tr - sub.trace()).norm() < 1e-10);
    }

    #[test]
    fn sylvester_residual() {
        let a = sample(3, 0.5);
        let (_, t1) = schur(&a).unwrap();
        let b = sample(2, 2.0) + CMatrix::identity(2, 2) * c(10.0);
        let (_, t2) = schur(&b).unwrap();
        let rhs = CMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64, j as f64 + 1.0));
        let y = sylvester_triangular(&t1, &t2, &rhs).unwrap();
        assert!((&t1 * &y - &y * &t2 - rhs).norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_tracks_volume() {
        let a = sample(4, 0.9).columns(0, 2).into_owned();
        let (q, det) = orthonormalize(&a);
        let gram = a.adjoint() * &a;
        assert!((determinant(&gram).re - det.norm_sqr()).abs() < 1e-10 * det.norm_sqr());
        assert!((q.adjoint() * &q - CMatrix::identity(2, 2)).norm() < 1e-12);
    }
}

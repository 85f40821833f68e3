//! First-order coefficient matrices `W' = A(x_1; lambda, xi) W` of the
//! eigenvalue problem in integrated, flux, balanced-flux and modified
//! balanced-flux coordinates.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{EvansError, Result};
use crate::linalg::{self, c, CMatrix, Partition, I};
use crate::model::SystemModel;
use crate::profile::ShockProfile;

/// Spectral parameter `lambda` and transverse wave vector `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    pub lambda: Complex64,
    pub xi: Vec<f64>,
}

impl Frequency {
    pub fn new(lambda: Complex64, xi: Vec<f64>) -> Self {
        Self { lambda, xi }
    }

    pub fn one_d(lambda: Complex64) -> Self {
        Self { lambda, xi: Vec::new() }
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `r = |lambda, xi|`.
    pub fn r(&self) -> f64 {
        (self.lambda.norm_sqr() + self.xi_norm().powi(2)).sqrt()
    }

    /// `r_2 = |xi| + lambda`.
    pub fn r2(&self) -> Complex64 {
        self.lambda + self.xi_norm()
    }

    /// Unit angle `(lambda, xi) / r`.
    pub fn angle(&self) -> Result<(Complex64, Vec<f64>)> {
        let r = self.r();
        if r == 0.0 {
            return Err(EvansError::AngleRequired);
        }
        Ok((self.lambda / r, self.xi.iter().map(|x| x / r).collect()))
    }

    /// `(lambda, xi) / rho` for a scale `rho`.
    pub fn sharp(&self, rho: Complex64) -> Result<(Complex64, Vec<Complex64>)> {
        if rho == c(0.0) {
            return Err(EvansError::AngleRequired);
        }
        Ok((self.lambda / rho, self.xi.iter().map(|x| c(*x) / rho).collect()))
    }
}

/// Formulation of the first-order eigenvalue system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Integrated1d,
    Flux1d,
    BalancedFlux1d,
    FluxMd,
    SharpMd,
    IntegratedB21,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Integrated1d,
        Variant::Flux1d,
        Variant::BalancedFlux1d,
        Variant::FluxMd,
        Variant::SharpMd,
        Variant::IntegratedB21,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Integrated1d => "integrated_1d",
            Variant::Flux1d => "flux_1d",
            Variant::BalancedFlux1d => "balanced_flux_1d",
            Variant::FluxMd => "flux_md",
            Variant::SharpMd => "sharp_md",
            Variant::IntegratedB21 => "integrated_b21",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = EvansError;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .find(|v| v.as_str() == s)
            .copied()
            .ok_or_else(|| EvansError::InvalidInput(format!("unknown variant `{s}`")))
    }
}

/// Frozen coefficients of the linearization about `U(x_1)`.
#[derive(Debug, Clone)]
pub struct LinearizedCoeffs {
    pub u: DVector<f64>,
    pub du: DVector<f64>,
    /// `A^0(U)`.
    pub a0: DMatrix<f64>,
    /// `bar A^j` for `j = 1..=d` at index `j - 1`; includes `-s A^0` for `j = 1`
    /// and the `-dB^{j1}(U)(., U')` correction.
    pub a: Vec<DMatrix<f64>>,
    /// `tilde A^j = bar A^j + (B^{j1})'` for `j = 1..=d` at index `j - 1`.
    pub a_tilde: Vec<DMatrix<f64>>,
    /// `B^{jk}(U)` at index `[j - 1][k - 1]`.
    pub b: Vec<Vec<DMatrix<f64>>>,
    /// `(B^{11})' = dB^{11}(U)[U']`.
    pub db11: DMatrix<f64>,
}

/// Linearized coefficients at a state with given slope.
pub fn linearized_at(model: &SystemModel, u: &DVector<f64>, du: &DVector<f64>) -> LinearizedCoeffs {
    let n = model.n();
    let d = model.d();
    let law = &model.law;
    let a0 = law.jacobian(0, u);
    let mut a = Vec::with_capacity(d);
    let mut a_tilde = Vec::with_capacity(d);
    let moving = du.amax() > 0.0;
    let mut db11 = DMatrix::zeros(n, n);
    for j in 1..=d {
        let mut aj = law.jacobian(j, u);
        if j == 1 {
            aj -= &a0 * model.speed;
        }
        let mut corr = DMatrix::zeros(n, n);
        let mut dbj1 = DMatrix::zeros(n, n);
        if moving {
            for i in 0..n {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                corr.set_column(i, &(law.viscosity_derivative(j, 1, u, &e) * du));
            }
            dbj1 = law.viscosity_derivative(j, 1, u, du);
        }
        let abar = aj - corr;
        if j == 1 {
            db11 = dbj1.clone();
        }
        a_tilde.push(&abar + dbj1);
        a.push(abar);
    }
    let b = (1..=d)
        .map(|j| (1..=d).map(|k| law.viscosity(j, k, u)).collect())
        .collect();
    LinearizedCoeffs { u: u.clone(), du: du.clone(), a0, a, a_tilde, b, db11 }
}

/// Linearized coefficients at `x1` along the profile.
pub fn linearized_coeffs(model: &SystemModel, p: &ShockProfile, x1: f64) -> LinearizedCoeffs {
    let (u, du) = p.eval(x1);
    linearized_at(model, &u, &du)
}

#[derive(Debug, Clone)]
enum Assembly {
    Integrated { lambda: Complex64 },
    Flux { lambda: Complex64 },
    Sharp { rho: Complex64, lambda: Complex64, xi: Vec<Complex64> },
    B21 { lambda: Complex64 },
}

/// `x_1`-dependent coefficient matrix of a formulation at a fixed frequency.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub variant: Variant,
    pub freq: Frequency,
    /// Scale used by the balanced variants (1 for flux, `lambda` for the 1D balanced form).
    pub rho: Complex64,
    pub model: SystemModel,
    pub profile: Arc<ShockProfile>,
    assembly: Assembly,
    plus: CMatrix,
    minus: CMatrix,
}

impl CoefficientField {
    pub fn big_n(&self) -> usize {
        self.model.big_n()
    }

    pub fn partition(&self) -> Partition {
        self.model.partition()
    }

    /// The matrix at `x1`.
    pub fn eval(&self, x1: f64) -> CMatrix {
        let lin = linearized_coeffs(&self.model, &self.profile, x1);
        assemble(&self.model, &lin, &self.assembly).unwrap_or_else(|_| {
            CMatrix::from_element(self.big_n(), self.big_n(), Complex64::new(f64::NAN, f64::NAN))
        })
    }

    /// Limits as `x1 -> +inf` and `x1 -> -inf`.
    pub fn limits(&self) -> (&CMatrix, &CMatrix) {
        (&self.plus, &self.minus)
    }

    pub fn limit(&self, plus: bool) -> &CMatrix {
        if plus {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// The same formulation over another frequency.
    pub fn with_frequency(&self, freq: &Frequency) -> Result<CoefficientField> {
        let p = self.profile.clone();
        match self.variant {
            Variant::Integrated1d => build_integrated_1d(&self.model, p, freq.lambda),
            Variant::Flux1d => build_flux_1d(&self.model, p, freq.lambda),
            Variant::BalancedFlux1d => build_balanced_flux_1d(&self.model, p, freq.lambda),
            Variant::FluxMd => build_flux_md(&self.model, p, freq),
            Variant::IntegratedB21 => build_integrated_b21(&self.model, p, freq.lambda),
            Variant::SharpMd => Err(EvansError::InvalidInput(
                "sharp fields are rebuilt through their scaling rule".into(),
            )),
        }
    }

    /// Matrix dump with block separators between the `(r, n - r, n - r)` groups.
    pub fn dump(&self, x1: f64) -> String {
        let m = if x1.is_infinite() {
            self.limit(x1 > 0.0).clone()
        } else {
            self.eval(x1)
        };
        dump_matrix(&m, &block_sizes(&self.model))
    }
}

fn block_sizes(model: &SystemModel) -> Vec<usize> {
    let p = model.partition();
    vec![p.r, p.m, p.m]
}

/// Formats a complex matrix as a text table with `|` and `-` separators
/// between the given row/column block sizes.
pub fn dump_matrix(m: &CMatrix, blocks: &[usize]) -> String {
    let mut cuts = Vec::new();
    let mut acc = 0;
    for b in blocks {
        acc += b;
        cuts.push(acc);
    }
    let mut out = String::new();
    for i in 0..m.nrows() {
        let mut line = String::new();
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = write!(line, " {:>+.6e}{:+.6e}i", z.re, z.im);
            if cuts.contains(&(j + 1)) && j + 1 < m.ncols() {
                line.push_str(" |");
            }
        }
        out.push_str(line.trim_start());
        out.push('\n');
        if cuts.contains(&(i + 1)) && i + 1 < m.nrows() {
            out.push_str(&"-".repeat(line.len().min(200)));
            out.push('\n');
        }
    }
    out
}

struct Blocks {
    part: Partition,
    a0: CMatrix,
    a1: CMatrix,
    a11inv: CMatrix,
    binv: CMatrix,
}

fn blocks(model: &SystemModel, lin: &LinearizedCoeffs) -> Result<Blocks> {
    let part = model.partition();
    let a1 = linalg::to_complex(&lin.a[0]);
    let a11inv = linalg::inverse(&part.b11(&a1))
        .ok_or(EvansError::NoninvertibleHyperbolicBlock { x: f64::NAN })?;
    let binv = linalg::inverse(&linalg::to_complex(&part.b22(&lin.b[0][0]))).ok_or_else(|| {
        EvansError::DegenerateViscosity { state: lin.u.iter().cloned().collect() }
    })?;
    Ok(Blocks { part, a0: linalg::to_complex(&lin.a0), a1, a11inv, binv })
}

fn place(dst: &mut CMatrix, row: usize, col: usize, src: &CMatrix) {
    if src.nrows() > 0 && src.ncols() > 0 {
        dst.view_mut((row, col), (src.nrows(), src.ncols())).copy_from(src);
    }
}

fn assemble(model: &SystemModel, lin: &LinearizedCoeffs, how: &Assembly) -> Result<CMatrix> {
    match how {
        Assembly::Integrated { lambda } => assemble_integrated(model, lin, *lambda),
        Assembly::Flux { lambda } => assemble_flux(model, lin, *lambda),
        Assembly::Sharp { rho, lambda, xi } => assemble_sharp(model, lin, *rho, *lambda, xi),
        Assembly::B21 { lambda } => assemble_b21(model, lin, *lambda),
    }
}

/// Integrated coordinates `Z = (W, u_2-part of (A^0)^{-1} W')`.
fn assemble_integrated(model: &SystemModel, lin: &LinearizedCoeffs, lambda: Complex64) -> Result<CMatrix> {
    let bl = blocks(model, lin)?;
    let p = bl.part;
    let (r, m) = (p.r, p.m);
    let a = &bl.a11inv;
    let (a0, a1) = (&bl.a0, &bl.a1);
    let mut out = CMatrix::zeros(r + 2 * m, r + 2 * m);
    let a1_12 = p.b12(a1);
    place(&mut out, 0, 0, &(-(p.b11(a0) * a) * lambda));
    place(&mut out, 0, r + m, &(p.b12(a0) - p.b11(a0) * a * &a1_12));
    place(&mut out, r, 0, &(-(p.b21(a0) * a) * lambda));
    place(&mut out, r, r + m, &(p.b22(a0) - p.b21(a0) * a * &a1_12));
    place(&mut out, r + m, 0, &(-(&bl.binv * p.b21(a1) * a) * lambda));
    place(&mut out, r + m, r, &(&bl.binv * lambda));
    place(&mut out, r + m, r + m, &(&bl.binv * (p.b22(a1) - p.b21(a1) * a * &a1_12)));
    Ok(out)
}

/// Flux coordinates `W = (f, u_2)` with `f = B^{11} U' - bar A^1 U`.
fn assemble_flux(model: &SystemModel, lin: &LinearizedCoeffs, lambda: Complex64) -> Result<CMatrix> {
    let bl = blocks(model, lin)?;
    let p = bl.part;
    let (r, m) = (p.r, p.m);
    let a = &bl.a11inv;
    let (a0, a1) = (&bl.a0, &bl.a1);
    let a1_12 = p.b12(a1);
    let mut out = CMatrix::zeros(r + 2 * m, r + 2 * m);
    place(&mut out, 0, 0, &(-(p.b11(a0) * a) * lambda));
    place(&mut out, 0, r + m, &((p.b12(a0) - p.b11(a0) * a * &a1_12) * lambda));
    place(&mut out, r, 0, &(-(p.b21(a0) * a) * lambda));
    place(&mut out, r, r + m, &((p.b22(a0) - p.b21(a0) * a * &a1_12) * lambda));
    place(&mut out, r + m, 0, &(-(&bl.binv * p.b21(a1) * a)));
    place(&mut out, r + m, r, &bl.binv);
    place(&mut out, r + m, r + m, &(&bl.binv * (p.b22(a1) - p.b21(a1) * a * &a1_12)));
    Ok(out)
}

/// Scaled flux coordinates `(f / rho, u_2)` at angle `(lambda, xi) = (lambda^#, xi^#)`.
fn assemble_sharp(
    model: &SystemModel,
    lin: &LinearizedCoeffs,
    rho: Complex64,
    lambda: Complex64,
    xi: &[Complex64],
) -> Result<CMatrix> {
    let bl = blocks(model, lin)?;
    let p = bl.part;
    let (r, m) = (p.r, p.m);
    let n = p.n();
    let a = &bl.a11inv;
    let a1 = &bl.a1;
    let d = model.d();
    if xi.len() + 1 != d && !xi.is_empty() {
        return Err(EvansError::InvalidInput(format!(
            "transverse frequency has {} components, expected {}",
            xi.len(),
            d - 1
        )));
    }
    // Lambda = lambda A^0 + i tilde A^xi, b^xi and b^{xi xi}
    let mut lam_mat = &bl.a0 * lambda;
    let mut bxi = CMatrix::zeros(m, m);
    let mut bxixi = CMatrix::zeros(m, m);
    for (jj, xj) in xi.iter().enumerate() {
        let j = jj + 1;
        lam_mat += linalg::to_complex(&lin.a_tilde[j]) * (I * xj);
        let bj = &lin.b[j][0] + &lin.b[0][j];
        bxi += linalg::to_complex(&p.b22(&bj)) * *xj;
        for (kk, xk) in xi.iter().enumerate() {
            bxixi += linalg::to_complex(&p.b22(&lin.b[j][kk + 1])) * (xj * xk);
        }
    }
    let lam_1 = lam_mat.columns(0, r).into_owned();
    let lam_2 = lam_mat.columns(r, m).into_owned();
    let a1_12 = p.b12(a1);
    let mut out = CMatrix::zeros(n + m, n + m);
    place(&mut out, 0, 0, &(-(&lam_1 * a) * rho));
    let mut col3 = -(&lam_1 * a * &a1_12) + &lam_2;
    if m > 0 {
        let mut low = col3.rows_mut(r, m);
        low += &bxixi * rho;
    }
    place(&mut out, 0, n, &col3);
    place(&mut out, n, 0, &(-(&bl.binv * p.b21(a1) * a) * rho));
    place(&mut out, n, r, &(&bl.binv * rho));
    place(
        &mut out,
        n,
        n,
        &(&bl.binv * (p.b22(a1) - p.b21(a1) * a * &a1_12 - &bxi * (I * rho))),
    );
    Ok(out)
}

/// Integrated coordinates when `B^{11}` has a lower-left block.
fn assemble_b21(model: &SystemModel, lin: &LinearizedCoeffs, lambda: Complex64) -> Result<CMatrix> {
    let p = model.partition();
    let (r, m) = (p.r, p.m);
    let a0 = linalg::to_complex(&lin.a0);
    let a1 = linalg::to_complex(&lin.a[0]);
    let b = &lin.b[0][0];
    let b22 = p.b22(b);
    let b22inv_r = linalg::inverse_real(&b22).ok_or_else(|| EvansError::DegenerateViscosity {
        state: lin.u.iter().cloned().collect(),
    })?;
    let k_r = &b22inv_r * p.b21(b);
    // (b22^{-1} b21)' through the chain rule
    let db = &lin.db11;
    let kp_r = -(&b22inv_r * p.b22(db) * &k_r) + &b22inv_r * p.b21(db);
    let b22inv = linalg::to_complex(&b22inv_r);
    let k = linalg::to_complex(&k_r);
    let kp = linalg::to_complex(&kp_r);
    let b22c = linalg::to_complex(&b22);
    let (a11, a12, a21, a22) = (p.b11(&a1), p.b12(&a1), p.b21(&a1), p.b22(&a1));
    let calb = &a11 - &a12 * &k;
    let calbinv = linalg::inverse(&calb).ok_or(EvansError::NoninvertibleHyperbolicBlock { x: f64::NAN })?;
    let m1 = -&calbinv * lambda;
    let m3 = -(&calbinv * &a12);
    let n1 = &k * &calbinv * lambda;
    let n3 = CMatrix::identity(m, m) + &k * &calbinv * &a12;
    let a31 = &b22inv
        * (-(&a21 * &calbinv) * lambda - &b22c * &kp * &calbinv * lambda + &a22 * &k * &calbinv * lambda);
    let a32 = &b22inv * lambda;
    let a33 = &b22inv
        * (-(&a21 * &calbinv * &a12) - &b22c * &kp * &calbinv * &a12
            + &a22
            + &a22 * &k * &calbinv * &a12);
    let mut out = CMatrix::zeros(r + 2 * m, r + 2 * m);
    place(&mut out, 0, 0, &(p.b11(&a0) * &m1 + p.b12(&a0) * &n1));
    place(&mut out, 0, r + m, &(p.b11(&a0) * &m3 + p.b12(&a0) * &n3));
    place(&mut out, r, 0, &(p.b21(&a0) * &m1 + p.b22(&a0) * &n1));
    place(&mut out, r, r + m, &(p.b21(&a0) * &m3 + p.b22(&a0) * &n3));
    place(&mut out, r + m, 0, &a31);
    place(&mut out, r + m, r, &a32);
    place(&mut out, r + m, r + m, &a33);
    Ok(out)
}

fn check_profile_h1(model: &SystemModel, p: &ShockProfile, modified: bool) -> Result<()> {
    let part = model.partition();
    if part.r == 0 {
        return Ok(());
    }
    let ends = [(&p.u_minus, f64::NEG_INFINITY), (&p.u_plus, f64::INFINITY)];
    let nodes = p.grid.iter().zip(&p.values).map(|(x, u)| (u, *x));
    for (u, x) in ends.into_iter().chain(nodes) {
        let lin = linearized_at(model, u, &DVector::zeros(model.n()));
        let mut mat = part.b11(&lin.a[0]);
        if modified {
            let b = &lin.b[0][0];
            let b22inv = linalg::inverse_real(&part.b22(b))
                .ok_or_else(|| EvansError::DegenerateViscosity { state: u.iter().cloned().collect() })?;
            mat -= part.b12(&lin.a[0]) * b22inv * part.b21(b);
        }
        let scale = 1.0 + mat.amax();
        let lu = mat.lu();
        let ok = lu.is_invertible() && lu.determinant().abs() > 1e-12 * scale.powi(part.r as i32);
        if !ok {
            return Err(EvansError::NoninvertibleHyperbolicBlock { x });
        }
    }
    Ok(())
}

fn build(
    model: &SystemModel,
    profile: Arc<ShockProfile>,
    variant: Variant,
    freq: Frequency,
    rho: Complex64,
    assembly: Assembly,
) -> Result<CoefficientField> {
    let n = model.n();
    if profile.n() != n {
        return Err(EvansError::InvalidInput("profile and model dimensions differ".into()));
    }
    check_profile_h1(model, &profile, variant == Variant::IntegratedB21)?;
    let zero = DVector::zeros(n);
    let plus = assemble(model, &linearized_at(model, &profile.u_plus, &zero), &assembly)?;
    let minus = assemble(model, &linearized_at(model, &profile.u_minus, &zero), &assembly)?;
    Ok(CoefficientField { variant, freq, rho, model: model.clone(), profile, assembly, plus, minus })
}

pub fn build_integrated_1d(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    lambda: Complex64,
) -> Result<CoefficientField> {
    build(model, p, Variant::Integrated1d, Frequency::one_d(lambda), c(1.0), Assembly::Integrated { lambda })
}

pub fn build_flux_1d(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    lambda: Complex64,
) -> Result<CoefficientField> {
    build(model, p, Variant::Flux1d, Frequency::one_d(lambda), c(1.0), Assembly::Flux { lambda })
}

/// Balanced flux `f / lambda`; coincides with the integrated form.
pub fn build_balanced_flux_1d(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    lambda: Complex64,
) -> Result<CoefficientField> {
    if lambda == c(0.0) {
        return Err(EvansError::ScalingUndefined);
    }
    let assembly = Assembly::Sharp { rho: lambda, lambda: c(1.0), xi: Vec::new() };
    build(model, p, Variant::BalancedFlux1d, Frequency::one_d(lambda), lambda, assembly)
}

fn check_xi(model: &SystemModel, xi_len: usize) -> Result<()> {
    if xi_len != 0 && xi_len + 1 != model.d() {
        return Err(EvansError::InvalidInput(format!(
            "transverse frequency has {xi_len} components, expected {}",
            model.d() - 1
        )));
    }
    Ok(())
}

pub fn build_flux_md(model: &SystemModel, p: Arc<ShockProfile>, freq: &Frequency) -> Result<CoefficientField> {
    check_xi(model, freq.xi.len())?;
    let assembly = Assembly::Sharp {
        rho: c(1.0),
        lambda: freq.lambda,
        xi: freq.xi.iter().map(|x| c(*x)).collect(),
    };
    build(model, p, Variant::FluxMd, freq.clone(), c(1.0), assembly)
}

/// Scaled flux system at scale `rho` and angle `(lambda_sharp, xi_sharp)`;
/// polynomial in `rho`, so `rho = 0` is allowed.
pub fn build_sharp_md(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    rho: Complex64,
    lambda_sharp: Complex64,
    xi_sharp: &[Complex64],
) -> Result<CoefficientField> {
    check_xi(model, xi_sharp.len())?;
    let freq = Frequency {
        lambda: rho * lambda_sharp,
        xi: xi_sharp.iter().map(|x| (rho * x).re).collect(),
    };
    let assembly = Assembly::Sharp { rho, lambda: lambda_sharp, xi: xi_sharp.to_vec() };
    build(model, p, Variant::SharpMd, freq, rho, assembly)
}

/// Balanced flux field at `rho = r(lambda, xi)`.
pub fn build_bf(model: &SystemModel, p: Arc<ShockProfile>, freq: &Frequency) -> Result<CoefficientField> {
    let r = c(freq.r());
    let (l, x) = freq.sharp(r)?;
    let mut f = build_sharp_md(model, p, r, l, &x)?;
    f.freq = freq.clone();
    Ok(f)
}

/// Modified balanced flux field at `rho = r_2(lambda, xi) = |xi| + lambda`.
pub fn build_mbf(model: &SystemModel, p: Arc<ShockProfile>, freq: &Frequency) -> Result<CoefficientField> {
    let r2 = freq.r2();
    let (l, x) = freq.sharp(r2)?;
    let mut f = build_sharp_md(model, p, r2, l, &x)?;
    f.freq = freq.clone();
    Ok(f)
}

pub fn build_integrated_b21(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    lambda: Complex64,
) -> Result<CoefficientField> {
    build(model, p, Variant::IntegratedB21, Frequency::one_d(lambda), c(1.0), Assembly::B21 { lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }

    #[test]
    fn frequency_polar_data() {
        let f = Frequency::new(Complex64::new(3.0, 0.0), vec![4.0]);
        assert!((f.r() - 5.0).abs() < 1e-15);
        assert_eq!(f.r2(), Complex64::new(7.0, 0.0));
        let (l, x) = f.angle().unwrap();
        assert!((l.norm_sqr() + x[0] * x[0] - 1.0).abs() < 1e-15);
        assert!(matches!(Frequency::new(c(0.0), vec![0.0]).angle(), Err(EvansError::AngleRequired)));
    }
}

//! Built-in systems with analytic Jacobians and default shock data.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{EvansError, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{check_rh, ConservationLaw, SystemModel};

pub const SYSTEM_NAMES: [&str; 4] =
    ["burgers", "isentropic_lagrangian_1d", "isentropic_eulerian_2d", "glancing_model"];

/// Viscous Burgers equation `u_t + (u^2/2)_x = (b u_x)_x`.
#[derive(Debug, Clone)]
pub struct Burgers {
    pub viscosity: f64,
}

impl ConservationLaw for Burgers {
    fn state_dim(&self) -> usize {
        1
    }
    fn hyperbolic_dim(&self) -> usize {
        0
    }
    fn space_dim(&self) -> usize {
        1
    }
    fn flux(&self, j: usize, u: &DVector<f64>) -> DVector<f64> {
        match j {
            0 => u.clone(),
            _ => DVector::from_element(1, 0.5 * u[0] * u[0]),
        }
    }
    fn jacobian(&self, j: usize, u: &DVector<f64>) -> DMatrix<f64> {
        match j {
            0 => DMatrix::identity(1, 1),
            _ => DMatrix::from_element(1, 1, u[0]),
        }
    }
    fn viscosity(&self, _j: usize, _k: usize, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.viscosity)
    }
    fn viscosity_derivative(
        &self,
        _j: usize,
        _k: usize,
        _u: &DVector<f64>,
        _dir: &DVector<f64>,
    ) -> DMatrix<f64> {
        DMatrix::zeros(1, 1)
    }
}

/// Isentropic gas dynamics in Lagrangian coordinates, `U = (v, u)`:
/// `v_t - u_x = 0`, `u_t + p(v)_x = (nu u_x / v)_x`, `p(v) = a v^{-gamma}`.
#[derive(Debug, Clone)]
pub struct IsentropicLagrangian {
    pub gamma: f64,
    pub a: f64,
    pub viscosity: f64,
}

impl IsentropicLagrangian {
    pub fn pressure(&self, v: f64) -> f64 {
        self.a * v.powf(-self.gamma)
    }

    pub fn pressure_derivative(&self, v: f64) -> f64 {
        -self.gamma * self.a * v.powf(-self.gamma - 1.0)
    }
}

impl ConservationLaw for IsentropicLagrangian {
    fn state_dim(&self) -> usize {
        2
    }
    fn hyperbolic_dim(&self) -> usize {
        1
    }
    fn space_dim(&self) -> usize {
        1
    }
    fn flux(&self, j: usize, u: &DVector<f64>) -> DVector<f64> {
        match j {
            0 => u.clone(),
            _ => DVector::from_vec(vec![-u[1], self.pressure(u[0])]),
        }
    }
    fn jacobian(&self, j: usize, u: &DVector<f64>) -> DMatrix<f64> {
        match j {
            0 => DMatrix::identity(2, 2),
            _ => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, self.pressure_derivative(u[0]), 0.0]),
        }
    }
    fn viscosity(&self, _j: usize, _k: usize, u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, self.viscosity / u[0]])
    }
    fn viscosity_derivative(
        &self,
        _j: usize,
        _k: usize,
        u: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> DMatrix<f64> {
        let d = -self.viscosity * dir[0] / (u[0] * u[0]);
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, d])
    }
}

/// Isentropic Navier–Stokes in Eulerian coordinates in `d` space dimensions.
///
/// The state is `(rho, u_1, ..., u_d)` with conserved quantities
/// `f^0 = (rho, rho u)`, so the viscosity acts on the parabolic block with
/// constant coefficients `b^{jk} = mu delta_jk I + (mu + eta) e_j e_k^T`.
#[derive(Debug, Clone)]
pub struct IsentropicEulerian {
    pub dim: usize,
    pub gamma: f64,
    pub a: f64,
    pub mu: f64,
    pub eta: f64,
}

impl IsentropicEulerian {
    pub fn pressure(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }

    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        self.gamma * self.a * rho.powf(self.gamma - 1.0)
    }
}

impl ConservationLaw for IsentropicEulerian {
    fn state_dim(&self) -> usize {
        self.dim + 1
    }
    fn hyperbolic_dim(&self) -> usize {
        1
    }
    fn space_dim(&self) -> usize {
        self.dim
    }
    fn flux(&self, j: usize, u: &DVector<f64>) -> DVector<f64> {
        let rho = u[0];
        let mut out = DVector::zeros(self.dim + 1);
        if j == 0 {
            out[0] = rho;
            for i in 1..=self.dim {
                out[i] = rho * u[i];
            }
        } else {
            out[0] = rho * u[j];
            for i in 1..=self.dim {
                out[i] = rho * u[j] * u[i];
            }
            out[j] += self.pressure(rho);
        }
        out
    }
    fn jacobian(&self, j: usize, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim + 1;
        let rho = u[0];
        let mut m = DMatrix::zeros(n, n);
        if j == 0 {
            m[(0, 0)] = 1.0;
            for i in 1..n {
                m[(i, 0)] = u[i];
                m[(i, i)] = rho;
            }
        } else {
            m[(0, 0)] = u[j];
            m[(0, j)] = rho;
            for i in 1..n {
                m[(i, 0)] = u[j] * u[i];
                m[(i, j)] += rho * u[i];
                m[(i, i)] += rho * u[j];
            }
            m[(j, 0)] += self.pressure_derivative(rho);
        }
        m
    }
    fn viscosity(&self, j: usize, k: usize, _u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim + 1;
        let mut m = DMatrix::zeros(n, n);
        if j == k {
            for i in 1..n {
                m[(i, i)] = self.mu;
            }
        }
        m[(j, k)] += self.mu + self.eta;
        m
    }
    fn viscosity_derivative(
        &self,
        _j: usize,
        _k: usize,
        _u: &DVector<f64>,
        _dir: &DVector<f64>,
    ) -> DMatrix<f64> {
        DMatrix::zeros(self.dim + 1, self.dim + 1)
    }
}

/// A law rewritten in new unknowns `V` with `U = psi(V)`,
/// `psi(V) = T V - (kappa/2) V_0^2 e_r`.
///
/// The viscosity of the transformed law is `B(psi(V)) dpsi(V)`, which acquires
/// a lower-left block whenever `T` or `kappa` couples the hyperbolic unknowns
/// into the parabolic rows.
#[derive(Debug, Clone)]
pub struct TransformedLaw {
    pub base: Arc<dyn ConservationLaw>,
    pub t: DMatrix<f64>,
    pub kappa: f64,
}

impl TransformedLaw {
    pub fn new(base: Arc<dyn ConservationLaw>, t: DMatrix<f64>, kappa: f64) -> Result<Self> {
        let n = base.state_dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(EvansError::InvalidInput("transform must be n x n".into()));
        }
        if base.space_dim() != 1 {
            return Err(EvansError::InvalidInput(
                "lower-left viscosity is supported in one space dimension only".into(),
            ));
        }
        if base.hyperbolic_dim() == 0 || base.hyperbolic_dim() == n {
            return Err(EvansError::InvalidInput("transform needs 0 < r < n".into()));
        }
        Ok(Self { base, t, kappa })
    }

    fn quad_row(&self) -> usize {
        self.base.hyperbolic_dim()
    }

    pub fn psi(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut u = &self.t * v;
        u[self.quad_row()] -= 0.5 * self.kappa * v[0] * v[0];
        u
    }

    pub fn dpsi(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.t.clone();
        m[(self.quad_row(), 0)] -= self.kappa * v[0];
        m
    }

    /// `d^2 psi[dir]` as a matrix acting on a second direction.
    fn d2psi(&self, dir: &DVector<f64>) -> DMatrix<f64> {
        let n = self.t.nrows();
        let mut m = DMatrix::zeros(n, n);
        m[(self.quad_row(), 0)] = -self.kappa * dir[0];
        m
    }

    /// Solves `psi(V) = U` by Newton iteration.
    pub fn psi_inverse(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let tinv = linalg::inverse_real(&self.t)
            .ok_or_else(|| EvansError::InvalidInput("singular transform".into()))?;
        let mut v = &tinv * u;
        for _ in 0..60 {
            let res = self.psi(&v) - u;
            if res.amax() < 1e-15 * (1.0 + u.amax()) {
                return Ok(v);
            }
            let j = linalg::inverse_real(&self.dpsi(&v))
                .ok_or_else(|| EvansError::InvalidInput("transform is not invertible".into()))?;
            v -= j * res;
        }
        let res = self.psi(&v) - u;
        if res.amax() < 1e-12 * (1.0 + u.amax()) {
            Ok(v)
        } else {
            Err(EvansError::InvalidInput("could not invert the coordinate transform".into()))
        }
    }
}

impl ConservationLaw for TransformedLaw {
    fn state_dim(&self) -> usize {
        self.base.state_dim()
    }
    fn hyperbolic_dim(&self) -> usize {
        self.base.hyperbolic_dim()
    }
    fn space_dim(&self) -> usize {
        1
    }
    fn flux(&self, j: usize, v: &DVector<f64>) -> DVector<f64> {
        self.base.flux(j, &self.psi(v))
    }
    fn jacobian(&self, j: usize, v: &DVector<f64>) -> DMatrix<f64> {
        self.base.jacobian(j, &self.psi(v)) * self.dpsi(v)
    }
    fn viscosity(&self, j: usize, k: usize, v: &DVector<f64>) -> DMatrix<f64> {
        self.base.viscosity(j, k, &self.psi(v)) * self.dpsi(v)
    }
    fn viscosity_derivative(
        &self,
        j: usize,
        k: usize,
        v: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> DMatrix<f64> {
        let u = self.psi(v);
        let dp = self.dpsi(v);
        let du = &dp * dir;
        self.base.viscosity_derivative(j, k, &u, &du) * &dp
            + self.base.viscosity(j, k, &u) * self.d2psi(dir)
    }
    fn has_lower_left_viscosity(&self) -> bool {
        true
    }
}

/// The order-two glancing fixture `[[0, 1], [lambda_hat - i tau(xi_hat) + r, 0]]`.
#[derive(Clone)]
pub struct GlancingFixture {
    pub tau: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for GlancingFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GlancingFixture").finish_non_exhaustive()
    }
}

impl GlancingFixture {
    pub fn linear(slope: f64) -> Self {
        Self { tau: Arc::new(move |x| slope * x) }
    }

    pub fn delta(&self, r: f64, xi_hat: f64, lambda_hat: Complex64) -> Complex64 {
        lambda_hat - linalg::I * (self.tau)(xi_hat) + r
    }

    pub fn matrix(&self, r: f64, xi_hat: f64, lambda_hat: Complex64) -> CMatrix {
        let delta = self.delta(r, xi_hat, lambda_hat);
        CMatrix::from_row_slice(2, 2, &[linalg::c(0.0), linalg::c(1.0), delta, linalg::c(0.0)])
    }
}

/// A conservation law with a default shock.
#[derive(Debug, Clone)]
pub struct ShockSystem {
    pub name: String,
    pub model: SystemModel,
    pub u_minus: DVector<f64>,
    pub u_plus: DVector<f64>,
    pub params: BTreeMap<String, f64>,
}

impl ShockSystem {
    /// Re-expresses the system in the unknowns `V` with `U = psi(V)`.
    pub fn transformed(&self, t: DMatrix<f64>, kappa: f64) -> Result<ShockSystem> {
        let law = TransformedLaw::new(self.model.law.clone(), t, kappa)?;
        let u_minus = law.psi_inverse(&self.u_minus)?;
        let u_plus = law.psi_inverse(&self.u_plus)?;
        let mut params = self.params.clone();
        params.insert("kappa".into(), kappa);
        Ok(ShockSystem {
            name: format!("{}_transformed", self.name),
            model: SystemModel::new(Arc::new(law), self.model.speed),
            u_minus,
            u_plus,
            params,
        })
    }
}

#[derive(Debug, Clone)]
pub enum SystemSpec {
    Shock(ShockSystem),
    Glancing { fixture: GlancingFixture, params: BTreeMap<String, f64> },
}

impl SystemSpec {
    pub fn shock(self) -> Result<ShockSystem> {
        match self {
            SystemSpec::Shock(s) => Ok(s),
            SystemSpec::Glancing { .. } => Err(EvansError::InvalidInput(
                "glancing_model is a matrix fixture without a shock".into(),
            )),
        }
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        match self {
            SystemSpec::Shock(s) => &s.params,
            SystemSpec::Glancing { params, .. } => params,
        }
    }
}

/// Default parameters of a registered system.
pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>> {
    let entries: &[(&str, f64)] = match name {
        "burgers" => &[("u_minus", 1.0), ("u_plus", -1.0), ("viscosity", 1.0)],
        "isentropic_lagrangian_1d" => &[
            ("gamma", 5.0 / 3.0),
            ("a", 1.0),
            ("viscosity", 1.0),
            ("v_minus", 1.0),
            ("v_plus", 0.5),
            ("u_minus", 0.0),
        ],
        "isentropic_eulerian_2d" => &[
            ("gamma", 5.0 / 3.0),
            ("a", 1.0),
            ("mu", 1.0),
            ("eta", -2.0 / 3.0),
            ("rho_minus", 1.0),
            ("rho_plus", 2.0),
            ("speed", 0.0),
            ("dim", 2.0),
        ],
        "glancing_model" => &[("tau_slope", 1.0)],
        other => return Err(EvansError::UnknownSystem(other.to_string())),
    };
    Ok(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

/// Looks up a registered system with default parameters.
pub fn get(name: &str) -> Result<SystemSpec> {
    get_with(name, &BTreeMap::new())
}

/// Looks up a registered system, overriding named parameters.
pub fn get_with(name: &str, overrides: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut params = default_params(name)?;
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(EvansError::InvalidInput(format!(
                "system `{name}` has no parameter `{k}`"
            )));
        }
        if !v.is_finite() {
            return Err(EvansError::InvalidInput(format!("parameter `{k}` is not finite")));
        }
        params.insert(k.clone(), *v);
    }
    if name == "isentropic_eulerian_2d" && overrides.contains_key("mu") && !overrides.contains_key("eta") {
        params.insert("eta".into(), -2.0 * params["mu"] / 3.0);
    }
    let p = |k: &str| params[k];
    let spec = match name {
        "burgers" => {
            let (um, up) = (p("u_minus"), p("u_plus"));
            let law = Burgers { viscosity: p("viscosity") };
            SystemSpec::Shock(ShockSystem {
                name: name.into(),
                model: SystemModel::new(Arc::new(law), 0.5 * (um + up)),
                u_minus: DVector::from_element(1, um),
                u_plus: DVector::from_element(1, up),
                params: params.clone(),
            })
        }
        "isentropic_lagrangian_1d" => {
            let law = IsentropicLagrangian { gamma: p("gamma"), a: p("a"), viscosity: p("viscosity") };
            let (vm, vp, um) = (p("v_minus"), p("v_plus"), p("u_minus"));
            if vm <= 0.0 || vp <= 0.0 || vm == vp {
                return Err(EvansError::InvalidInput("need distinct positive v_minus, v_plus".into()));
            }
            let s2 = -(law.pressure(vp) - law.pressure(vm)) / (vp - vm);
            if s2 <= 0.0 {
                return Err(EvansError::InvalidInput("no real shock speed for these volumes".into()));
            }
            let s = -s2.sqrt();
            let up = um - s * (vp - vm);
            SystemSpec::Shock(ShockSystem {
                name: name.into(),
                model: SystemModel::new(Arc::new(law), s),
                u_minus: DVector::from_vec(vec![vm, um]),
                u_plus: DVector::from_vec(vec![vp, up]),
                params: params.clone(),
            })
        }
        "isentropic_eulerian_2d" => {
            let dim = p("dim");
            if dim.fract() != 0.0 || !(1.0..=3.0).contains(&dim) {
                return Err(EvansError::InvalidInput("dim must be 1, 2 or 3".into()));
            }
            let dim = dim as usize;
            let law = IsentropicEulerian { dim, gamma: p("gamma"), a: p("a"), mu: p("mu"), eta: p("eta") };
            let (rm, rp, s) = (p("rho_minus"), p("rho_plus"), p("speed"));
            if rm <= 0.0 || rp <= 0.0 || rm == rp {
                return Err(EvansError::InvalidInput("need distinct positive densities".into()));
            }
            let m2 = (law.pressure(rp) - law.pressure(rm)) / (1.0 / rm - 1.0 / rp);
            if m2 <= 0.0 {
                return Err(EvansError::InvalidInput("no real mass flux for these densities".into()));
            }
            let m = m2.sqrt();
            let mut u_minus = DVector::zeros(dim + 1);
            let mut u_plus = DVector::zeros(dim + 1);
            u_minus[0] = rm;
            u_plus[0] = rp;
            u_minus[1] = s + m / rm;
            u_plus[1] = s + m / rp;
            SystemSpec::Shock(ShockSystem {
                name: name.into(),
                model: SystemModel::new(Arc::new(law), s),
                u_minus,
                u_plus,
                params: params.clone(),
            })
        }
        "glancing_model" => SystemSpec::Glancing {
            fixture: GlancingFixture::linear(p("tau_slope")),
            params: params.clone(),
        },
        other => return Err(EvansError::UnknownSystem(other.to_string())),
    };
    if let SystemSpec::Shock(sys) = &spec {
        let rh = check_rh(&sys.model, &sys.u_minus, &sys.u_plus);
        if rh > 1e-10 * (1.0 + sys.model.shifted_flux(&sys.u_minus).amax()) {
            return Err(EvansError::InvalidInput(format!("default shock violates RH by {rh:.3e}")));
        }
    }
    Ok(spec)
}

/// Convenience accessor for the shock systems.
pub fn shock(name: &str) -> Result<ShockSystem> {
    get(name)?.shock()
}

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error)]
pub enum EvansError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("degenerate viscosity: b22 block is singular at state {state:?}")]
    DegenerateViscosity { state: Vec<f64> },

    #[error("characteristic shock: speed {speed:.3e} at the {side} state is within tolerance of zero")]
    CharacteristicShock { side: &'static str, speed: f64 },

    #[error("hyperbolic block A11 - s A0_11 is not invertible at x1 = {x:.6}")]
    NoninvertibleHyperbolicBlock { x: f64 },

    #[error("no connecting profile: {0}")]
    NoConnection(String),

    #[error("profile tail residual {residual:.3e} exceeds tolerance; try half-length L = {suggested:.2}")]
    DomainTooShort { residual: f64, suggested: f64 },

    #[error("splitting failure: spectral gap {gap:.3e} below tolerance")]
    SplittingFailure { gap: f64 },

    #[error("basis discontinuity near lambda = {at}: projector jump {jump:.3e} after maximal bisection")]
    Discontinuity { at: Complex64, jump: f64 },

    #[error("balanced-flux scaling undefined at zero scale")]
    ScalingUndefined,

    #[error("frequency (lambda, xi) = 0 requires an explicit limiting angle")]
    AngleRequired,

    #[error("integrator failure: {0}")]
    Accuracy(String),

    #[error("contour resolution exceeded between lambda = {from} and lambda = {to}")]
    Resolution { from: Complex64, to: Complex64 },

    #[error("Evans function (numerically) vanishes on the contour near lambda = {at}")]
    ZeroOnContour { at: Complex64 },

    #[error("glancing configuration: eigenprojector norm {norm:.3e}")]
    Glancing { norm: f64 },

    #[error("low-frequency fit failed: {0}")]
    Fit(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, EvansError>;

impl EvansError {
    /// Stable snake_case name of the variant for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            EvansError::InvalidInput(_) => "invalid_input",
            EvansError::UnknownSystem(_) => "unknown_system",
            EvansError::DegenerateViscosity { .. } => "degenerate_viscosity",
            EvansError::CharacteristicShock { .. } => "characteristic_shock",
            EvansError::NoninvertibleHyperbolicBlock { .. } => "noninvertible_hyperbolic_block",
            EvansError::NoConnection(_) => "no_connection",
            EvansError::DomainTooShort { .. } => "domain_too_short",
            EvansError::SplittingFailure { .. } => "splitting_failure",
            EvansError::Discontinuity { .. } => "discontinuity",
            EvansError::ScalingUndefined => "scaling_undefined",
            EvansError::AngleRequired => "angle_required",
            EvansError::Accuracy(_) => "accuracy",
            EvansError::Resolution { .. } => "resolution",
            EvansError::ZeroOnContour { .. } => "zero_on_contour",
            EvansError::Glancing { .. } => "glancing",
            EvansError::Fit(_) => "fit",
            EvansError::Linalg(_) => "linalg",
        }
    }
}

//! Run configuration: a TOML file with nested sections, every field defaulted.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A configuration problem, located by its dotted field path.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    /// Overrides of the system's named parameters.
    pub params: BTreeMap<String, f64>,
    pub variant: String,
    /// Seed for randomly drawn frequencies.
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub jobs: usize,
    pub profile: ProfileSection,
    pub ode: OdeSection,
    pub eval: EvalSection,
    pub contour: ContourSection,
    pub lowfreq: LowFreqSection,
    pub regime_scan: RegimeScanSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: "isentropic_lagrangian_1d".into(),
            params: BTreeMap::new(),
            variant: "integrated_1d".into(),
            seed: 0,
            jobs: 0,
            profile: ProfileSection::default(),
            ode: OdeSection::default(),
            eval: EvalSection::default(),
            contour: ContourSection::default(),
            lowfreq: LowFreqSection::default(),
            regime_scan: RegimeScanSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub nodes: usize,
    /// Half-length of the domain; 0 picks it from the end-state decay rates.
    pub half_length: f64,
    pub tol: f64,
    pub tail_tol: f64,
    pub phase_point: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self { nodes: 401, half_length: 0.0, tol: 1e-11, tail_tol: 1e-6, phase_point: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeSection {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-11, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Frequencies as `[re, im]` pairs.
    pub lambda: Vec<[f64; 2]>,
    pub xi: Vec<f64>,
    /// Extra frequencies drawn uniformly from `random_box`.
    pub random: usize,
    /// `[re_min, re_max, im_min, im_max]`.
    pub random_box: [f64; 4],
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { lambda: vec![[1.0, 0.0], [0.5, 0.5]], xi: Vec::new(), random: 0, random_box: [0.0, 5.0, -5.0, 5.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSection {
    /// `circle`, `semicircle` or `rectangle`.
    pub shape: String,
    pub center: [f64; 2],
    pub radius: f64,
    /// `[re_min, re_max, im_min, im_max]` for rectangles.
    pub rectangle: [f64; 4],
    pub samples: usize,
    pub max_depth: usize,
    pub xi: Vec<f64>,
    /// Traverse only the upper half and use conjugate symmetry.
    pub half: bool,
}

impl Default for ContourSection {
    fn default() -> Self {
        Self {
            shape: "circle".into(),
            center: [1.5, 0.0],
            radius: 1.4,
            rectangle: [0.1, 2.0, -2.0, 2.0],
            samples: 64,
            max_depth: 14,
            xi: Vec::new(),
            half: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LowFreqSection {
    /// Explicit directions `[re lambda, im lambda, xi...]`; normalized on use.
    pub angles: Vec<Vec<f64>>,
    /// Directions generated when `angles` is empty.
    pub angle_count: usize,
    /// Smallest real part of the generated unit directions.
    pub min_re_lambda: f64,
    pub radii: Vec<f64>,
}

impl Default for LowFreqSection {
    fn default() -> Self {
        Self { angles: Vec::new(), angle_count: 8, min_re_lambda: 0.3, radii: vec![1e-2, 3e-3, 1e-3] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeScanSection {
    /// Radius of the small shell in `(lambda, xi)` sampled with balanced flux.
    pub shell_radius: f64,
    /// Samples per polar and azimuthal direction on the shell.
    pub shell_samples: usize,
    /// Radius of the intermediate-frequency semicircle for modified balanced flux.
    pub contour_radius: f64,
    pub contour_samples: usize,
    /// Transverse slices `|xi|` of the intermediate scan.
    pub xi_slices: Vec<f64>,
}

impl Default for RegimeScanSection {
    fn default() -> Self {
        Self { shell_radius: 1e-2, shell_samples: 6, contour_radius: 10.0, contour_samples: 64, xi_slices: vec![0.0, 0.5, 1.0] }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, vs: &[f64]) -> Result<(), ConfigError> {
    match vs.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(ConfigError::new(field, format!("must be finite, got {v}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("", format!("invalid config file: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the fields shared by all tasks.
    pub fn validate_common(&self) -> Result<(), ConfigError> {
        if self.profile.nodes < 11 {
            return Err(ConfigError::new("profile.nodes", "need at least 11 nodes"));
        }
        if self.profile.half_length != 0.0 {
            positive("profile.half_length", self.profile.half_length)?;
        }
        positive("profile.tol", self.profile.tol)?;
        positive("profile.tail_tol", self.profile.tail_tol)?;
        finite("profile.phase_point", &[self.profile.phase_point])?;
        positive("ode.rtol", self.ode.rtol)?;
        positive("ode.atol", self.ode.atol)?;
        if self.ode.max_steps == 0 {
            return Err(ConfigError::new("ode.max_steps", "must be positive"));
        }
        finite("params", &self.params.values().copied().collect::<Vec<_>>())?;
        Ok(())
    }

    pub fn validate_eval(&self) -> Result<(), ConfigError> {
        if self.eval.lambda.is_empty() && self.eval.random == 0 {
            return Err(ConfigError::new("eval.lambda", "no frequencies given"));
        }
        finite("eval.lambda", &self.eval.lambda.iter().flatten().copied().collect::<Vec<_>>())?;
        finite("eval.xi", &self.eval.xi)?;
        let b = self.eval.random_box;
        finite("eval.random_box", &b)?;
        if self.eval.random > 0 && !(b[0] < b[1] && b[2] < b[3]) {
            return Err(ConfigError::new("eval.random_box", "need re_min < re_max and im_min < im_max"));
        }
        Ok(())
    }

    pub fn validate_contour(&self) -> Result<(), ConfigError> {
        let c = &self.contour;
        match c.shape.as_str() {
            "circle" | "semicircle" => {
                finite("contour.center", &c.center)?;
                positive("contour.radius", c.radius)?;
            }
            "rectangle" => {
                let r = c.rectangle;
                finite("contour.rectangle", &r)?;
                if !(r[0] < r[1] && r[2] < r[3]) {
                    return Err(ConfigError::new("contour.rectangle", "need re_min < re_max and im_min < im_max"));
                }
            }
            other => {
                return Err(ConfigError::new(
                    "contour.shape",
                    format!("unknown shape `{other}`; expected circle, semicircle or rectangle"),
                ))
            }
        }
        if c.samples < 8 {
            return Err(ConfigError::new("contour.samples", "need at least 8 samples"));
        }
        finite("contour.xi", &c.xi)?;
        Ok(())
    }

    pub fn validate_lowfreq(&self) -> Result<(), ConfigError> {
        let l = &self.lowfreq;
        if l.radii.is_empty() {
            return Err(ConfigError::new("lowfreq.radii", "no radii given"));
        }
        for r in &l.radii {
            positive("lowfreq.radii", *r)?;
        }
        if l.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::new("lowfreq.radii", "must be strictly decreasing"));
        }
        if l.angles.is_empty() && l.angle_count == 0 {
            return Err(ConfigError::new("lowfreq.angle_count", "no angles given"));
        }
        if !(0.0..1.0).contains(&l.min_re_lambda) {
            return Err(ConfigError::new("lowfreq.min_re_lambda", "must lie in [0, 1)"));
        }
        for (i, a) in l.angles.iter().enumerate() {
            let field = format!("lowfreq.angles[{i}]");
            if a.len() < 2 {
                return Err(ConfigError::new(field, "need [re lambda, im lambda, xi...]"));
            }
            finite(&field, a)?;
        }
        Ok(())
    }

    pub fn validate_regime_scan(&self) -> Result<(), ConfigError> {
        let s = &self.regime_scan;
        positive("regime_scan.shell_radius", s.shell_radius)?;
        positive("regime_scan.contour_radius", s.contour_radius)?;
        if s.shell_samples < 2 {
            return Err(ConfigError::new("regime_scan.shell_samples", "need at least 2"));
        }
        if s.contour_samples < 8 {
            return Err(ConfigError::new("regime_scan.contour_samples", "need at least 8"));
        }
        if s.xi_slices.is_empty() {
            return Err(ConfigError::new("regime_scan.xi_slices", "no slices given"));
        }
        finite("regime_scan.xi_slices", &s.xi_slices)?;
        if s.xi_slices.iter().any(|x| *x < 0.0) {
            return Err(ConfigError::new("regime_scan.xi_slices", "slices are magnitudes and must be nonnegative"));
        }
        if s.shell_radius >= s.contour_radius {
            return Err(ConfigError::new("regime_scan.shell_radius", "must be smaller than contour_radius"));
        }
        Ok(())
    }
}

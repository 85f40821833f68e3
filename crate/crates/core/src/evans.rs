//! Evans determinants from bases at `+-inf`, and winding numbers along
//! closed contours in the spectral parameter.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bases::{self, Flavor, KatoState};
use crate::error::{EvansError, Result};
use crate::formulations::{self, CoefficientField, Frequency, Variant};
use crate::linalg::{self, c, CMatrix};
use crate::model::SystemModel;
use crate::ode::{Dopri5, OdeOptions};
use crate::profile::ShockProfile;

/// Conditioning below which a matched matrix is flagged.
pub const ILL_CONDITIONED: f64 = 1e-13;

/// Formulation used to define an Evans function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvansVariant {
    Integrated1d,
    Flux1d,
    BalancedFlux1d,
    FluxMd,
    /// Balanced flux at scale `r = |(lambda, xi)|`.
    Bf,
    /// Modified balanced flux at scale `r_2 = |xi| + lambda`.
    Mbf,
    IntegratedB21,
}

impl EvansVariant {
    pub const ALL: [EvansVariant; 7] = [
        EvansVariant::Integrated1d,
        EvansVariant::Flux1d,
        EvansVariant::BalancedFlux1d,
        EvansVariant::FluxMd,
        EvansVariant::Bf,
        EvansVariant::Mbf,
        EvansVariant::IntegratedB21,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EvansVariant::Integrated1d => "integrated_1d",
            EvansVariant::Flux1d => "flux_1d",
            EvansVariant::BalancedFlux1d => "balanced_flux_1d",
            EvansVariant::FluxMd => "flux_md",
            EvansVariant::Bf => "bf",
            EvansVariant::Mbf => "mbf",
            EvansVariant::IntegratedB21 => "integrated_b21",
        }
    }

    pub fn is_one_d(&self) -> bool {
        matches!(
            self,
            EvansVariant::Integrated1d
                | EvansVariant::Flux1d
                | EvansVariant::BalancedFlux1d
                | EvansVariant::IntegratedB21
        )
    }
}

impl fmt::Display for EvansVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvansVariant {
    type Err = EvansError;
    fn from_str(s: &str) -> Result<Self> {
        EvansVariant::ALL
            .iter()
            .find(|v| v.as_str() == s)
            .copied()
            .ok_or_else(|| EvansError::InvalidInput(format!("unknown variant `{s}`")))
    }
}

/// Coefficient field of a variant at a frequency.
pub fn build_field(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    variant: EvansVariant,
    freq: &Frequency,
) -> Result<CoefficientField> {
    if variant.is_one_d() && freq.xi_norm() != 0.0 {
        return Err(EvansError::InvalidInput(format!(
            "variant {variant} requires xi = 0"
        )));
    }
    match variant {
        EvansVariant::Integrated1d => formulations::build_integrated_1d(model, p, freq.lambda),
        EvansVariant::Flux1d => formulations::build_flux_1d(model, p, freq.lambda),
        EvansVariant::BalancedFlux1d => formulations::build_balanced_flux_1d(model, p, freq.lambda),
        EvansVariant::IntegratedB21 => formulations::build_integrated_b21(model, p, freq.lambda),
        EvansVariant::FluxMd => formulations::build_flux_md(model, p, &pad_xi(model, freq)),
        EvansVariant::Bf => formulations::build_bf(model, p, &pad_xi(model, freq)),
        EvansVariant::Mbf => formulations::build_mbf(model, p, &pad_xi(model, freq)),
    }
}

fn pad_xi(model: &SystemModel, freq: &Frequency) -> Frequency {
    let mut f = freq.clone();
    if f.xi.is_empty() && model.d() > 1 {
        f.xi = vec![0.0; model.d() - 1];
    }
    f
}

/// Initializing basis at one end with the trace of the limit matrix on it.
#[derive(Debug, Clone)]
pub struct SideBasis {
    pub basis: CMatrix,
    pub trace: Complex64,
}

/// Bases of the subspaces decaying at `+inf` (stable) and `-inf` (unstable).
#[derive(Debug, Clone)]
pub struct EvansInit {
    pub plus: SideBasis,
    pub minus: SideBasis,
}

/// How initializing bases are chosen for a single evaluation.
#[derive(Debug, Clone, Default)]
pub enum BasisPolicy {
    /// Orthonormal Schur vectors.
    Orthonormal,
    /// `P R_ref`, with pivoted identity columns when no reference is given.
    #[default]
    Projected,
    /// `P R_ref` with explicit references for the two ends.
    ProjectedWith { plus: CMatrix, minus: CMatrix },
}

/// Sign-based initializing bases for a field.
pub fn make_init(field: &CoefficientField, policy: &BasisPolicy) -> Result<EvansInit> {
    let (ap, am) = field.limits();
    let sp = bases::split(ap)?;
    let sm = bases::split(am)?;
    if sp.k_stable + sm.k_unstable != field.big_n() {
        return Err(EvansError::InvalidInput(format!(
            "inconsistent splitting: {} stable at +inf, {} unstable at -inf, N = {}",
            sp.k_stable,
            sm.k_unstable,
            field.big_n()
        )));
    }
    let (bp, bm) = match policy {
        BasisPolicy::Orthonormal => (sp.stable.basis.clone(), sm.unstable.basis.clone()),
        BasisPolicy::Projected => (
            bases::projected_basis(&sp.stable.projector, sp.k_stable, None)?,
            bases::projected_basis(&sm.unstable.projector, sm.k_unstable, None)?,
        ),
        BasisPolicy::ProjectedWith { plus, minus } => (
            bases::projected_basis(&sp.stable.projector, sp.k_stable, Some(plus))?,
            bases::projected_basis(&sm.unstable.projector, sm.k_unstable, Some(minus))?,
        ),
    };
    Ok(EvansInit {
        plus: SideBasis { basis: bp, trace: sp.stable.trace() },
        minus: SideBasis { basis: bm, trace: sm.unstable.trace() },
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvansOptions {
    /// Matching point; defaults to the profile's phase point.
    pub x_match: Option<f64>,
    pub ode: OdeOptions,
}

/// One Evans function value `D = value * exp(log_scale)`.
#[derive(Debug, Clone)]
pub struct EvansSample {
    pub freq: Frequency,
    pub variant: Variant,
    pub rho: Complex64,
    pub value: Complex64,
    pub log_scale: f64,
    /// Smallest singular value of the matched matrix of orthonormal columns.
    pub conditioning: f64,
    pub ill_conditioned: bool,
}

impl EvansSample {
    /// `D` itself; may overflow for large `log_scale`.
    pub fn d(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    /// `D_self / D_other` computed without overflow.
    pub fn ratio(&self, other: &EvansSample) -> Complex64 {
        self.value / other.value * (self.log_scale - other.log_scale).exp()
    }

    pub fn arg(&self) -> f64 {
        self.value.arg()
    }
}

struct Propagated {
    q: CMatrix,
    log_mod: f64,
    phase: Complex64,
    degenerate: bool,
}

fn unit(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n == 0.0 {
        c(1.0)
    } else {
        z / n
    }
}

fn propagate(
    field: &CoefficientField,
    side: &SideBasis,
    plus: bool,
    x_match: f64,
    ode: OdeOptions,
) -> Result<Propagated> {
    let n = field.big_n();
    let k = side.basis.ncols();
    let (mut q, d0) = linalg::orthonormalize(&side.basis);
    if k == 0 {
        return Ok(Propagated { q: CMatrix::zeros(n, 0), log_mod: 0.0, phase: c(1.0), degenerate: false });
    }
    if !d0.is_finite() {
        return Err(EvansError::InvalidInput("initializing basis is not finite".into()));
    }
    if d0.norm() <= 1e-14 * side.basis.norm().powi(k as i32) {
        // dependent columns: the determinant vanishes identically
        return Ok(Propagated { q, log_mod: 0.0, phase: c(1.0), degenerate: true });
    }
    let mut log_mod = d0.norm().ln();
    let mut phase = unit(d0);
    let x_end = if plus { field.profile.x_max() } else { field.profile.x_min() };
    let shift = side.trace.re / k as f64;
    let eigs = linalg::eigenvalues(field.limit(plus))?;
    let re_max = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let re_min = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let chunk = (8.0 / (re_max - re_min).max(1e-12)).clamp(0.05, 2.0);
    let f = |x: f64, y: &CMatrix| -> CMatrix {
        let mut a = field.eval(x);
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        a * y
    };
    let mut ode = Dopri5::new(ode);
    let dir = (x_match - x_end).signum();
    let mut x = x_end;
    while (x_match - x) * dir > 0.0 {
        let next = if (x_match - x).abs() <= chunk * 1.5 { x_match } else { x + dir * chunk };
        let y = ode.integrate(f, x, next, q)?;
        let (qn, d) = linalg::orthonormalize(&y);
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(EvansError::Accuracy(format!("subspace collapsed near x = {next:.6}")));
        }
        log_mod += d.norm().ln();
        phase *= unit(d);
        q = qn;
        x = next;
    }
    phase *= Complex64::from_polar(1.0, side.trace.im * (x_end - x_match));
    Ok(Propagated { q, log_mod, phase, degenerate: false })
}

/// Evans determinant `det(W^+, W^-)` at the matching point.
pub fn evaluate(field: &CoefficientField, init: &EvansInit, opts: &EvansOptions) -> Result<EvansSample> {
    let n = field.big_n();
    let kp = init.plus.basis.ncols();
    let km = init.minus.basis.ncols();
    if kp + km != n || init.plus.basis.nrows() != n || init.minus.basis.nrows() != n {
        return Err(EvansError::InvalidInput(format!(
            "initializing bases have {kp} + {km} columns, expected {n}"
        )));
    }
    let x_match = opts.x_match.unwrap_or(field.profile.phase_point);
    if !(x_match > field.profile.x_min() && x_match < field.profile.x_max()) {
        return Err(EvansError::InvalidInput(format!("matching point {x_match} outside the profile domain")));
    }
    let p = propagate(field, &init.plus, true, x_match, opts.ode)?;
    let m = propagate(field, &init.minus, false, x_match, opts.ode)?;
    if p.degenerate || m.degenerate {
        return Ok(EvansSample {
            freq: field.freq.clone(),
            variant: field.variant,
            rho: field.rho,
            value: c(0.0),
            log_scale: 0.0,
            conditioning: 0.0,
            ill_conditioned: true,
        });
    }
    let mut mat = CMatrix::zeros(n, n);
    mat.columns_mut(0, kp).copy_from(&p.q);
    mat.columns_mut(kp, km).copy_from(&m.q);
    let det = linalg::determinant(&mat);
    let conditioning = linalg::smallest_singular_value(&mat);
    let value = det * p.phase * m.phase;
    if !value.is_finite() {
        return Err(EvansError::Accuracy("non-finite Evans value".into()));
    }
    Ok(EvansSample {
        freq: field.freq.clone(),
        variant: field.variant,
        rho: field.rho,
        value,
        log_scale: p.log_mod + m.log_mod,
        conditioning,
        ill_conditioned: conditioning < ILL_CONDITIONED,
    })
}

/// Builds the field of a variant and evaluates with the given basis policy.
pub fn evaluate_variant(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    variant: EvansVariant,
    freq: &Frequency,
    policy: &BasisPolicy,
    opts: &EvansOptions,
) -> Result<EvansSample> {
    let field = build_field(model, p, variant, freq)?;
    let init = make_init(&field, policy)?;
    evaluate(&field, &init, opts)
}

/// Balanced-flux Evans function `D_bf(lambda, xi)`.
pub fn evaluate_bf(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    freq: &Frequency,
    policy: &BasisPolicy,
    opts: &EvansOptions,
) -> Result<EvansSample> {
    if freq.r() == 0.0 {
        return Err(EvansError::AngleRequired);
    }
    evaluate_variant(model, p, EvansVariant::Bf, freq, policy, opts)
}

/// Modified balanced-flux Evans function `D_mbf(lambda, xi)`.
pub fn evaluate_mbf(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    freq: &Frequency,
    policy: &BasisPolicy,
    opts: &EvansOptions,
) -> Result<EvansSample> {
    if freq.r2() == c(0.0) {
        return Err(EvansError::AngleRequired);
    }
    evaluate_variant(model, p, EvansVariant::Mbf, freq, policy, opts)
}

/// Closed contour in the `lambda` plane, traversed counterclockwise from its
/// rightmost point.
#[derive(Debug, Clone, PartialEq)]
pub enum Contour {
    Circle { center: Complex64, radius: f64 },
    /// Boundary of the right half disk `{|lambda - center| <= radius, Re lambda >= Re center}`.
    Semicircle { center: Complex64, radius: f64 },
    Rectangle { re_min: f64, re_max: f64, im_min: f64, im_max: f64 },
}

impl Contour {
    /// Point at parameter `t` (periodic with period 1).
    pub fn point(&self, t: f64) -> Complex64 {
        let t = t.rem_euclid(1.0);
        match *self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(radius, 2.0 * PI * t),
            Contour::Semicircle { center, radius } => {
                let quarter = 0.5 * PI * radius;
                let total = PI * radius + 2.0 * radius;
                let s = t * total;
                if s <= quarter {
                    center + Complex64::from_polar(radius, s / radius)
                } else if s <= quarter + 2.0 * radius {
                    center + Complex64::new(0.0, radius - (s - quarter))
                } else {
                    center + Complex64::from_polar(radius, -0.5 * PI + (s - quarter - 2.0 * radius) / radius)
                }
            }
            Contour::Rectangle { re_min, re_max, im_min, im_max } => {
                let (w, h) = (re_max - re_min, im_max - im_min);
                let mid = 0.5 * (im_min + im_max);
                let total = 2.0 * (w + h);
                let mut s = t * total;
                let legs = [0.5 * h, w, h, w, 0.5 * h];
                let starts = [
                    Complex64::new(re_max, mid),
                    Complex64::new(re_max, im_max),
                    Complex64::new(re_min, im_max),
                    Complex64::new(re_min, im_min),
                    Complex64::new(re_max, im_min),
                ];
                let dirs = [
                    Complex64::new(0.0, 1.0),
                    Complex64::new(-1.0, 0.0),
                    Complex64::new(0.0, -1.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 1.0),
                ];
                for i in 0..5 {
                    if s <= legs[i] || i == 4 {
                        return starts[i] + dirs[i] * s;
                    }
                    s -= legs[i];
                }
                unreachable!()
            }
        }
    }

    /// Whether the contour is its own mirror image in the real axis.
    pub fn is_conjugate_symmetric(&self) -> bool {
        match *self {
            Contour::Circle { center, .. } | Contour::Semicircle { center, .. } => center.im == 0.0,
            Contour::Rectangle { im_min, im_max, .. } => im_min == -im_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Contour::Circle { radius, .. } | Contour::Semicircle { radius, .. } => radius > 0.0,
            Contour::Rectangle { re_min, re_max, im_min, im_max } => re_max > re_min && im_max > im_min,
        };
        if ok {
            Ok(())
        } else {
            Err(EvansError::InvalidInput("degenerate contour".into()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct WindingOptions {
    /// Initial number of samples on the (full) contour.
    pub samples: usize,
    /// Fixed transverse frequency.
    pub xi: Vec<f64>,
    /// Maximum bisection depth of a contour segment.
    pub max_depth: usize,
    pub evans: EvansOptions,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { samples: 64, xi: Vec::new(), max_depth: 14, evans: EvansOptions::default() }
    }
}

/// Samples of an Evans function around a contour with its winding number.
#[derive(Debug, Clone)]
pub struct ContourResult {
    pub contour: Contour,
    pub variant: EvansVariant,
    /// Contour parameters of the samples, increasing.
    pub params: Vec<f64>,
    pub samples: Vec<EvansSample>,
    pub winding: i64,
    /// Total phase change divided by `2 pi`.
    pub turns: f64,
    pub refinement_depth: usize,
    /// Whether only the upper half was traversed and the count doubled.
    pub half: bool,
}

impl ContourResult {
    /// Columnar text: `Re lambda, Im lambda, xi..., Re D, Im D, log_scale, conditioning`.
    pub fn to_columns(&self) -> String {
        samples_to_columns(&self.samples)
    }

    pub fn max_phase_increment(&self) -> f64 {
        let n = self.samples.len();
        let segs = if self.half { n - 1 } else { n };
        (0..segs)
            .map(|i| (self.samples[(i + 1) % n].value / self.samples[i].value).arg().abs())
            .fold(0.0, f64::max)
    }
}

pub fn samples_to_columns(samples: &[EvansSample]) -> String {
    let mut s = String::from("# re_lambda im_lambda xi... re_d im_d log_scale conditioning\n");
    for e in samples {
        let _ = write!(s, "{:.15e} {:.15e}", e.freq.lambda.re, e.freq.lambda.im);
        for x in &e.freq.xi {
            let _ = write!(s, " {:.15e}", x);
        }
        let _ = writeln!(
            s,
            " {:.15e} {:.15e} {:.15e} {:.6e}",
            e.value.re, e.value.im, e.log_scale, e.conditioning
        );
    }
    s
}

struct Node {
    t: f64,
    depth: usize,
    plus: KatoState,
    minus: KatoState,
    sample: Option<EvansSample>,
}

struct Tracer<'a> {
    model: &'a SystemModel,
    profile: Arc<ShockProfile>,
    variant: EvansVariant,
    contour: &'a Contour,
    opts: &'a WindingOptions,
}

impl Tracer<'_> {
    fn freq(&self, t: f64) -> Frequency {
        Frequency::new(self.contour.point(t), self.opts.xi.clone())
    }

    fn field(&self, f: &Frequency) -> Result<CoefficientField> {
        build_field(self.model, self.profile.clone(), self.variant, f)
    }

    fn transport(&self, from: &Node, t: f64, depth: usize) -> Result<Node> {
        let fa = self.freq(from.t);
        let fb = self.freq(t);
        // Sub-steps follow the contour rather than its chord.
        let steps = 4;
        let mut plus = from.plus.clone();
        let mut minus = from.minus.clone();
        let mut prev = fa;
        for i in 1..=steps {
            let ti = from.t + (t - from.t) * i as f64 / steps as f64;
            let fi = self.freq(ti);
            plus = bases::kato_segment(&|f: &Frequency| Ok(self.field(f)?.limit(true).clone()), &plus, &prev, &fi)?.0;
            minus = bases::kato_segment(&|f: &Frequency| Ok(self.field(f)?.limit(false).clone()), &minus, &prev, &fi)?.0;
            prev = fi;
        }
        debug_assert_eq!(prev, fb);
        Ok(Node { t, depth, plus, minus, sample: None })
    }

    fn evaluate_nodes(&self, nodes: &mut [Node]) -> Result<()> {
        let results: Vec<Result<EvansSample>> = nodes
            .par_iter()
            .map(|n| {
                if let Some(s) = &n.sample {
                    return Ok(s.clone());
                }
                let field = self.field(&self.freq(n.t))?;
                let init = EvansInit {
                    plus: SideBasis { basis: n.plus.r.clone(), trace: n.plus.group.trace() },
                    minus: SideBasis { basis: n.minus.r.clone(), trace: n.minus.group.trace() },
                };
                evaluate(&field, &init, &self.opts.evans)
            })
            .collect();
        for (n, r) in nodes.iter_mut().zip(results) {
            let s = r?;
            if s.ill_conditioned {
                return Err(EvansError::ZeroOnContour { at: s.freq.lambda });
            }
            n.sample = Some(s);
        }
        Ok(())
    }

    /// Samples `[t0, t1]` (closed loop when `closed`) with refinement.
    fn run(&self, t0: f64, t1: f64, count: usize, closed: bool) -> Result<(Vec<Node>, usize)> {
        let count = count.max(4);
        let start = self.freq(t0);
        let f0 = self.field(&start)?;
        let plus = KatoState::start(f0.limit(true), Flavor::Stable, None)?;
        let minus = KatoState::start(f0.limit(false), Flavor::Unstable, None)?;
        let n_total = f0.big_n();
        if plus.r.ncols() + minus.r.ncols() != n_total {
            return Err(EvansError::InvalidInput(format!(
                "inconsistent splitting at lambda = {}: {} + {} != {}",
                start.lambda,
                plus.r.ncols(),
                minus.r.ncols(),
                n_total
            )));
        }
        let mut nodes = vec![Node { t: t0, depth: 0, plus, minus, sample: None }];
        let last = if closed { count - 1 } else { count };
        for i in 1..=last {
            let t = t0 + (t1 - t0) * i as f64 / count as f64;
            let next = self.transport(nodes.last().unwrap(), t, 0)?;
            nodes.push(next);
        }
        self.evaluate_nodes(&mut nodes)?;
        let mut max_depth = 0;
        loop {
            let n = nodes.len();
            let segs = if closed { n } else { n - 1 };
            let mut bad = Vec::new();
            for i in 0..segs {
                let a = nodes[i].sample.as_ref().unwrap();
                let b = nodes[(i + 1) % n].sample.as_ref().unwrap();
                if (b.value / a.value).arg().abs() >= 0.5 * PI {
                    bad.push(i);
                }
            }
            if bad.is_empty() {
                break;
            }
            let mut inserts: Vec<(usize, Node)> = Vec::new();
            for &i in &bad {
                let a = &nodes[i];
                let tb = if i + 1 == n { t1 } else { nodes[i + 1].t };
                let depth = a.depth.max(if i + 1 == n { 0 } else { nodes[i + 1].depth }) + 1;
                if depth > self.opts.max_depth {
                    return Err(EvansError::Resolution { from: self.contour.point(a.t), to: self.contour.point(tb) });
                }
                max_depth = max_depth.max(depth);
                inserts.push((i, self.transport(a, 0.5 * (a.t + tb), depth)?));
            }
            let mut fresh: Vec<Node> = inserts.iter_mut().map(|(_, nd)| std::mem::replace(nd, dummy(nd))).collect();
            self.evaluate_nodes(&mut fresh)?;
            let mut merged = Vec::with_capacity(n + fresh.len());
            let mut fresh_iter = inserts.iter().map(|(i, _)| *i).zip(fresh);
            let mut pending = fresh_iter.next();
            for (i, node) in nodes.into_iter().enumerate() {
                merged.push(node);
                while let Some((j, _)) = &pending {
                    if *j == i {
                        let (_, nd) = pending.take().unwrap();
                        merged.push(nd);
                        pending = fresh_iter.next();
                    } else {
                        break;
                    }
                }
            }
            nodes = merged;
        }
        Ok((nodes, max_depth))
    }
}

fn dummy(n: &Node) -> Node {
    Node { t: n.t, depth: n.depth, plus: n.plus.clone(), minus: n.minus.clone(), sample: None }
}

fn phase_sum(samples: &[EvansSample], closed: bool) -> f64 {
    let n = samples.len();
    let segs = if closed { n } else { n - 1 };
    (0..segs).map(|i| (samples[(i + 1) % n].value / samples[i].value).arg()).sum()
}

/// Winding number of the Evans function of `variant` around `contour`.
pub fn winding(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    variant: EvansVariant,
    contour: &Contour,
    opts: &WindingOptions,
) -> Result<ContourResult> {
    contour.validate()?;
    let tracer = Tracer { model, profile: p, variant, contour, opts };
    let (nodes, depth) = tracer.run(0.0, 1.0, opts.samples, true)?;
    let params: Vec<f64> = nodes.iter().map(|n| n.t).collect();
    let samples: Vec<EvansSample> = nodes.into_iter().map(|n| n.sample.unwrap()).collect();
    let turns = phase_sum(&samples, true) / (2.0 * PI);
    Ok(ContourResult {
        contour: contour.clone(),
        variant,
        params,
        samples,
        winding: turns.round() as i64,
        turns,
        refinement_depth: depth,
        half: false,
    })
}

/// Winding number of a contour symmetric about the real axis from its upper
/// half, using `D(conj lambda) = conj D(lambda)`.
pub fn winding_upper_half(
    model: &SystemModel,
    p: Arc<ShockProfile>,
    variant: EvansVariant,
    contour: &Contour,
    opts: &WindingOptions,
) -> Result<ContourResult> {
    contour.validate()?;
    if !contour.is_conjugate_symmetric() || opts.xi.iter().any(|x| *x != 0.0) {
        return Err(EvansError::InvalidInput(
            "half-contour winding needs a contour symmetric about the real axis and xi = 0".into(),
        ));
    }
    let tracer = Tracer { model, profile: p, variant, contour, opts };
    let (nodes, depth) = tracer.run(0.0, 0.5, opts.samples.div_ceil(2), false)?;
    let params: Vec<f64> = nodes.iter().map(|n| n.t).collect();
    let samples: Vec<EvansSample> = nodes.into_iter().map(|n| n.sample.unwrap()).collect();
    let turns = 2.0 * phase_sum(&samples, false) / (2.0 * PI);
    if (turns - turns.round()).abs() > 0.1 {
        return Err(EvansError::Accuracy(format!(
            "half-contour phase {turns:.4} turns is not near an integer; endpoint values are not real"
        )));
    }
    Ok(ContourResult {
        contour: contour.clone(),
        variant,
        params,
        samples,
        winding: turns.round() as i64,
        turns,
        refinement_depth: depth,
        half: true,
    })
}

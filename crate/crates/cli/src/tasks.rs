//! Task implementations: each returns the artifacts to write on success.

use std::f64::consts::PI;
use std::sync::Arc;

use evans_core::evans::{
    evaluate_variant, samples_to_columns, winding, winding_upper_half, BasisPolicy, ContourResult, Contour,
    EvansOptions, EvansSample, EvansVariant, WindingOptions,
};
use evans_core::formulations::Frequency;
use evans_core::lopatinski::{fit_low_frequency, Angle};
use evans_core::model::{check_rh, classify};
use evans_core::ode::OdeOptions;
use evans_core::profile::{fit_decay_rates, profile_residual, solve_profile, ProfileOptions, ShockProfile};
use evans_core::systems::{self, ShockSystem};
use evans_core::EvansError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};
use crate::output::Artifacts;

#[derive(Debug)]
pub enum TaskError {
    Config(ConfigError),
    Numerical { context: String, error: EvansError },
}

impl From<ConfigError> for TaskError {
    fn from(e: ConfigError) -> Self {
        TaskError::Config(e)
    }
}

fn numerical(context: impl Into<String>) -> impl FnOnce(EvansError) -> TaskError {
    let context = context.into();
    move |error| TaskError::Numerical { context, error }
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vector<'a>(v: impl IntoIterator<Item = &'a f64>) -> Value {
    json!(v.into_iter().copied().collect::<Vec<_>>())
}

/// The configured system, its profile and the common numerical options.
pub struct Setup {
    pub system: ShockSystem,
    pub profile: Arc<ShockProfile>,
    pub evans: EvansOptions,
}

pub fn variant(cfg: &RunConfig) -> Result<EvansVariant, ConfigError> {
    cfg.variant.parse().map_err(|e: EvansError| ConfigError::new("variant", e.to_string()))
}

pub fn system(cfg: &RunConfig) -> Result<ShockSystem, ConfigError> {
    let spec = systems::get_with(&cfg.system, &cfg.params).map_err(|e| match e {
        EvansError::UnknownSystem(_) => ConfigError::new("system", e.to_string()),
        other => ConfigError::new("params", other.to_string()),
    })?;
    spec.shock().map_err(|e| ConfigError::new("system", e.to_string()))
}

pub fn setup(cfg: &RunConfig) -> Result<Setup, TaskError> {
    cfg.validate_common()?;
    let system = system(cfg)?;
    let opts = ProfileOptions {
        half_length: (cfg.profile.half_length > 0.0).then_some(cfg.profile.half_length),
        nodes: cfg.profile.nodes,
        tol: cfg.profile.tol,
        tail_tol: cfg.profile.tail_tol,
        phase_point: cfg.profile.phase_point,
    };
    let profile = solve_profile(&system.model, &system.u_minus, &system.u_plus, &opts).map_err(numerical("profile"))?;
    let evans = EvansOptions {
        x_match: None,
        ode: OdeOptions { rtol: cfg.ode.rtol, atol: cfg.ode.atol, max_steps: cfg.ode.max_steps },
    };
    Ok(Setup { system, profile: Arc::new(profile), evans })
}

fn check_xi(field: &str, xi: &[f64], d: usize, variant: EvansVariant) -> Result<(), ConfigError> {
    if !xi.is_empty() && xi.len() + 1 != d {
        return Err(ConfigError::new(field, format!("expected {} transverse components, got {}", d - 1, xi.len())));
    }
    if variant.is_one_d() && xi.iter().any(|x| *x != 0.0) {
        return Err(ConfigError::new(field, format!("variant {variant} needs xi = 0")));
    }
    Ok(())
}

fn system_summary(s: &Setup) -> Value {
    json!({
        "name": s.system.name,
        "params": s.system.params,
        "speed": s.system.model.speed,
        "u_minus": vector(&s.system.u_minus),
        "u_plus": vector(&s.system.u_plus),
    })
}

fn sample_record(s: &EvansSample) -> Value {
    json!({
        "lambda": cplx(s.freq.lambda),
        "xi": s.freq.xi,
        "value": cplx(s.value),
        "log_scale": s.log_scale,
        "conditioning": s.conditioning,
        "ill_conditioned": s.ill_conditioned,
    })
}

pub fn profile(cfg: &RunConfig) -> Result<Artifacts, TaskError> {
    let s = setup(cfg)?;
    let p = &s.profile;
    let model = &s.system.model;
    let class = classify(model, &s.system.u_minus, &s.system.u_plus).map_err(numerical("classification"))?;
    let decay = fit_decay_rates(p);
    let mut a = Artifacts::default();
    a.add("profile.dat", p.to_columns());
    a.summary = json!({
        "task": "profile",
        "system": system_summary(&s),
        "nodes": p.len(),
        "half_length": p.half_length,
        "phase_point": p.phase_point,
        "nu_minus": decay.nu_minus,
        "nu_plus": decay.nu_plus,
        "decay_reliable": decay.reliable,
        "residual": profile_residual(model, p),
        "rankine_hugoniot_defect": check_rh(model, &s.system.u_minus, &s.system.u_plus),
        "shock": { "kind": format!("{:?}", class.kind), "i": class.i, "o": class.o },
    });
    Ok(a)
}

/// Configured frequencies followed by the seeded random draws.
pub fn eval_frequencies(cfg: &RunConfig) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = cfg.eval.lambda.iter().map(|l| Complex64::new(l[0], l[1])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = cfg.eval.random_box;
    for _ in 0..cfg.eval.random {
        out.push(Complex64::new(rng.gen_range(b[0]..b[1]), rng.gen_range(b[2]..b[3])));
    }
    out
}

pub fn eval(cfg: &RunConfig) -> Result<Artifacts, TaskError> {
    cfg.validate_eval()?;
    let v = variant(cfg)?;
    let s = setup(cfg)?;
    check_xi("eval.xi", &cfg.eval.xi, s.system.model.d(), v)?;
    let lambdas = eval_frequencies(cfg);
    let samples: Vec<EvansSample> = lambdas
        .par_iter()
        .map(|l| {
            let freq = Frequency::new(*l, cfg.eval.xi.clone());
            evaluate_variant(&s.system.model, s.profile.clone(), v, &freq, &BasisPolicy::Projected, &s.evans)
                .map_err(numerical(format!("evaluation at lambda = {l}")))
        })
        .collect::<Result<_, _>>()?;
    let mut a = Artifacts::default();
    a.add("eval.dat", samples_to_columns(&samples));
    a.summary = json!({
        "task": "eval",
        "system": system_summary(&s),
        "variant": v.as_str(),
        "samples": samples.iter().map(sample_record).collect::<Vec<_>>(),
    });
    Ok(a)
}

fn contour_summary(r: &ContourResult) -> Value {
    json!({
        "winding": r.winding,
        "turns": r.turns,
        "refinement_depth": r.refinement_depth,
        "samples": r.samples.len(),
        "max_phase_increment": r.max_phase_increment(),
        "half": r.half,
        "min_conditioning": r.samples.iter().map(|s| s.conditioning).fold(f64::INFINITY, f64::min),
    })
}

fn contour_record(c: &Contour) -> Value {
    match c {
        Contour::Circle { center, radius } => json!({"shape": "circle", "center": cplx(*center), "radius": radius}),
        Contour::Semicircle { center, radius } => json!({"shape": "semicircle", "center": cplx(*center), "radius": radius}),
        Contour::Rectangle { re_min, re_max, im_min, im_max } => {
            json!({"shape": "rectangle", "re": [re_min, re_max], "im": [im_min, im_max]})
        }
    }
}

pub fn contour_of(cfg: &RunConfig) -> Contour {
    let c = &cfg.contour;
    let center = Complex64::new(c.center[0], c.center[1]);
    match c.shape.as_str() {
        "semicircle" => Contour::Semicircle { center, radius: c.radius },
        "rectangle" => {
            let r = c.rectangle;
            Contour::Rectangle { re_min: r[0], re_max: r[1], im_min: r[2], im_max: r[3] }
        }
        _ => Contour::Circle { center, radius: c.radius },
    }
}

pub fn contour(cfg: &RunConfig) -> Result<Artifacts, TaskError> {
    cfg.validate_contour()?;
    let v = variant(cfg)?;
    let s = setup(cfg)?;
    check_xi("contour.xi", &cfg.contour.xi, s.system.model.d(), v)?;
    let shape = contour_of(cfg);
    let opts = WindingOptions {
        samples: cfg.contour.samples,
        xi: cfg.contour.xi.clone(),
        max_depth: cfg.contour.max_depth,
        evans: s.evans,
    };
    let run = if cfg.contour.half { winding_upper_half } else { winding };
    let r = run(&s.system.model, s.profile.clone(), v, &shape, &opts).map_err(|e| match e {
        EvansError::InvalidInput(m) => TaskError::Config(ConfigError::new("contour", m)),
        other => TaskError::Numerical { context: "winding".into(), error: other },
    })?;
    let mut a = Artifacts::default();
    a.add("contour.dat", r.to_columns());
    let mut summary = json!({
        "task": "contour",
        "system": system_summary(&s),
        "variant": v.as_str(),
        "contour": contour_record(&shape),
        "xi": cfg.contour.xi,
    });
    merge(&mut summary, contour_summary(&r));
    a.summary = summary;
    Ok(a)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

/// Unit directions with `Re lambda >= min_re`, drawn from the seeded generator.
pub fn generated_angles(cfg: &RunConfig, d: usize) -> Vec<Angle> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    while out.len() < cfg.lowfreq.angle_count {
        let phi = rng.gen_range(-0.5 * PI..0.5 * PI);
        let mut xi: Vec<f64> = (1..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lambda = Complex64::from_polar(1.0, phi);
        // shrink the transverse part so that it does not dominate the direction
        xi.iter_mut().for_each(|x| *x *= 0.8);
        if let Ok(a) = Angle::new(lambda, xi) {
            if a.lambda.re >= cfg.lowfreq.min_re_lambda {
                out.push(a);
            }
        }
    }
    out
}

pub fn lowfreq(cfg: &RunConfig) -> Result<Artifacts, TaskError> {
    cfg.validate_lowfreq()?;
    let s = setup(cfg)?;
    let d = s.system.model.d();
    let angles = if cfg.lowfreq.angles.is_empty() {
        generated_angles(cfg, d)
    } else {
        cfg.lowfreq
            .angles
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let field = format!("lowfreq.angles[{i}]");
                if a.len() != d + 1 {
                    return Err(ConfigError::new(field, format!("expected {} entries", d + 1)));
                }
                let angle = Angle::new(Complex64::new(a[0], a[1]), a[2..].to_vec()).map_err(|e| ConfigError::new(&field, e.to_string()))?;
                if angle.lambda.re < 0.0 {
                    return Err(ConfigError::new(field, "needs Re lambda >= 0"));
                }
                Ok(angle)
            })
            .collect::<Result<_, _>>()?
    };
    let fit = fit_low_frequency(&s.system.model, s.profile.clone(), &angles, &cfg.lowfreq.radii, &s.evans)
        .map_err(numerical("low-frequency fit"))?;
    let mut a = Artifacts::default();
    a.add("lowfreq.dat", fit.to_table());
    a.summary = json!({
        "task": "lowfreq",
        "system": system_summary(&s),
        "radii": fit.radii,
        "angles": fit.angles.iter().map(|a| json!({"lambda": cplx(a.lambda), "xi": a.xi})).collect::<Vec<_>>(),
        "delta": fit.delta_values.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
        "gamma": fit.gamma_estimates.iter().map(|g| g.map(cplx).unwrap_or(Value::Null)).collect::<Vec<_>>(),
        "flagged": fit.flagged,
        "spread": fit.spread,
    });
    Ok(a)
}

/// Balanced-flux samples on a small shell, then modified balanced-flux
/// windings on a semicircle for each transverse slice.
pub fn regime_scan(cfg: &RunConfig) -> Result<Artifacts, TaskError> {
    cfg.validate_regime_scan()?;
    let s = setup(cfg)?;
    let rs = &cfg.regime_scan;
    let d = s.system.model.d();
    let k = rs.shell_samples;
    // open grids so that no direction lies on the imaginary axis
    let phis: Vec<f64> = (0..2 * k).map(|i| -0.5 * PI + PI * (i as f64 + 0.5) / (2 * k) as f64).collect();
    let thetas: Vec<f64> =
        if d == 1 { vec![0.0] } else { (0..k).map(|j| -0.5 * PI + PI * (j as f64 + 0.5) / k as f64).collect() };
    let mut freqs = Vec::new();
    for th in &thetas {
        for ph in &phis {
            let mut xi = vec![0.0; d - 1];
            if d > 1 {
                xi[0] = rs.shell_radius * th.sin();
            }
            freqs.push(Frequency::new(Complex64::from_polar(rs.shell_radius * th.cos(), *ph), xi));
        }
    }
    let shell: Vec<Result<EvansSample, EvansError>> = freqs
        .par_iter()
        .map(|f| evaluate_variant(&s.system.model, s.profile.clone(), EvansVariant::Bf, f, &BasisPolicy::Projected, &s.evans))
        .collect();
    let ok: Vec<EvansSample> = shell.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let failures: Vec<Value> = shell
        .iter()
        .zip(&freqs)
        .filter_map(|(r, f)| r.as_ref().err().map(|e| json!({"lambda": cplx(f.lambda), "xi": f.xi, "error": e.kind()})))
        .collect();
    if ok.is_empty() {
        let err = shell.into_iter().find_map(|r| r.err()).expect("no samples");
        return Err(TaskError::Numerical { context: "balanced-flux shell".into(), error: err });
    }
    let min_abs = ok.iter().map(|x| x.d().norm()).fold(f64::INFINITY, f64::min);
    let mut a = Artifacts::default();
    a.add("shell.dat", samples_to_columns(&ok));

    let slices: Vec<f64> = if d == 1 { vec![0.0] } else { rs.xi_slices.clone() };
    let shape = Contour::Semicircle { center: Complex64::new(rs.shell_radius, 0.0), radius: rs.contour_radius };
    let mut slice_records = Vec::new();
    let mut total = 0;
    for (i, x) in slices.iter().enumerate() {
        let mut xi = vec![0.0; d - 1];
        if d > 1 {
            xi[0] = *x;
        }
        let opts = WindingOptions { samples: rs.contour_samples, xi: xi.clone(), max_depth: cfg.contour.max_depth, evans: s.evans };
        let r = winding(&s.system.model, s.profile.clone(), EvansVariant::Mbf, &shape, &opts)
            .map_err(numerical(format!("modified balanced-flux winding at |xi| = {x}")))?;
        total += r.winding;
        a.add(format!("mbf_slice_{i}.dat"), r.to_columns());
        let mut rec = json!({ "xi": xi, "file": format!("mbf_slice_{i}.dat") });
        merge(&mut rec, contour_summary(&r));
        slice_records.push(rec);
    }
    a.summary = json!({
        "task": "regime-scan",
        "system": system_summary(&s),
        "shell": {
            "radius": rs.shell_radius,
            "samples": ok.len(),
            "failed": failures,
            "min_abs_d": min_abs,
            "min_conditioning": ok.iter().map(|x| x.conditioning).fold(f64::INFINITY, f64::min),
        },
        "contour": contour_record(&shape),
        "slices": slice_records,
        "zeros_found": total,
    });
    Ok(a)
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn evans(args: &[&str], out: &Path, config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evans"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn burgers_profile_matches_tanh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = evans(&["profile", "--system", "burgers"], &out, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = rows(&out.join("profile.dat"));
    assert!(data.len() > 100);
    let err = data.iter().map(|r| (r[1] + (0.5 * r[0]).tanh()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "max deviation {err}");
    let s = summary(&out);
    assert_eq!(s["shock"]["kind"], "Lax");
    assert!(s["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn lagrangian_contour_has_no_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = evans(&["contour"], &out, Some("[contour]\nsamples = 32\n"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["winding"], 0);
    assert!(s["turns"].as_f64().unwrap().abs() < 1e-6);
    let data = rows(&out.join("contour.dat"));
    assert_eq!(data.len(), s["samples"].as_u64().unwrap() as usize);
}

#[test]
fn half_contour_agrees_with_full() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let half = dir.path().join("half");
    let cfg = "system = \"burgers\"\n[contour]\nsamples = 32\n";
    assert!(evans(&["contour"], &full, Some(cfg)).status.success());
    let half_cfg = format!("{cfg}half = true\n");
    assert!(evans(&["contour"], &half, Some(&half_cfg)).status.success());
    assert_eq!(summary(&full)["winding"], summary(&half)["winding"]);
    assert_eq!(summary(&half)["half"], true);
}

#[test]
fn lowfreq_fit_is_direction_independent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l");
    let o = evans(&["lowfreq"], &out, Some("[lowfreq]\nangle_count = 4\n"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!(s["spread"].as_f64().unwrap() <= 0.1);
    assert_eq!(s["angles"].as_array().unwrap().len(), 4);
    for a in s["angles"].as_array().unwrap() {
        assert!(a["lambda"][0].as_f64().unwrap() >= 0.3);
    }
}

#[test]
fn eval_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "seed = 7\n[eval]\nrandom = 6\n";
    let mut outputs = Vec::new();
    for (name, jobs) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = dir.path().join(name);
        let o = evans(&["eval", "--jobs", jobs], &out, Some(cfg));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(out.join("eval.dat")).unwrap(), fs::read(out.join("summary.json")).unwrap()));
    }
    assert_eq!(rows(&dir.path().join("a").join("eval.dat")).len(), 8);
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn regime_scan_reports_shell_and_slices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let cfg = "system = \"burgers\"\n[regime_scan]\nshell_samples = 3\ncontour_radius = 3.0\ncontour_samples = 32\n";
    let o = evans(&["regime-scan"], &out, Some(cfg));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["shell"]["samples"], 6);
    assert!(s["shell"]["min_abs_d"].as_f64().unwrap() > 0.0);
    assert_eq!(s["slices"].as_array().unwrap().len(), 1);
    assert_eq!(s["zeros_found"], 0);
    assert!(out.join("shell.dat").exists() && out.join("mbf_slice_0.dat").exists());
}

fn error_record(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap()
}

#[test]
fn unknown_system_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = evans(&["profile", "--system", "nope"], &out, None);
    assert_eq!(o.status.code(), Some(2));
    let e = error_record(&out);
    assert_eq!(e["kind"], "config");
    assert_eq!(e["field"], "system");
    assert!(!out.join("summary.json").exists());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = evans(&["eval"], &out, Some("[ode]\nrtol = -1.0\n"));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&out)["field"], "ode.rtol");

    let out = dir.path().join("f");
    let o = evans(&["eval"], &out, Some("bogus = 1\n"));
    assert_eq!(o.status.code(), Some(2));

    let out = dir.path().join("g");
    let o = evans(&["eval", "--variant", "nonsense"], &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&out)["field"], "variant");
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n");
    let o = evans(&["eval"], &out, Some("[ode]\nmax_steps = 3\n"));
    assert_eq!(o.status.code(), Some(3));
    let e = error_record(&out);
    assert_eq!(e["kind"], "numerical");
    assert_eq!(e["error"], "accuracy");
    assert!(!out.join("eval.dat").exists());
}

#[test]
fn printed_defaults_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_evans")).arg("print-defaults").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(evans(&["profile"], &a, Some(&text)).status.success());
    assert!(evans(&["profile"], &b, None).status.success());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
}

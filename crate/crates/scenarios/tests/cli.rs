use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lvn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvn")).args(args).output().expect("binary runs")
}

fn run_with(dir: &Path, kind: &str, config: &str, check: bool) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![kind, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    if check {
        args.push("--check");
    }
    lvn(&args)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn rabi_reference_passes_and_writes_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "rabi", r#"{"kind": "rabi"}"#, true);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("out/rabi_traces.csv");
    assert_eq!(first_line(&csv), "t,rho_aa,rho_bb,re_rho_ab,im_rho_ab,purity");
    let body = fs::read_to_string(&csv).unwrap();
    assert!(!body.contains('\r'));
    assert_eq!(body.lines().count(), 6284 + 2);

    let r = report(dir.path());
    assert_eq!(r["kind"], "rabi");
    assert_eq!(r["failed"].as_array().unwrap().len(), 0);
    assert!(r["checks"]["lr_vs_direct_infidelity"]["value"].as_f64().unwrap() <= 1e-8);
    assert!(r["duration_seconds"].as_f64().unwrap() >= 0.0);
    let files = r["files"].as_array().unwrap();
    assert_eq!(files[0]["path"], "rabi_traces.csv");
    assert_eq!(files[0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn headers_of_other_kinds() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, file, header) in [
        ("invariant", "phases.csv", "t,mode,phi_total,phi_dynamical,phi_geometric"),
        ("susy", "spectrum.csv", "n,E_minus,E_plus,pair_deviation"),
        ("reduce", "reduction.csv", "t,mode,d_n,integrated_d_n,phi_total"),
    ] {
        let o = run_with(dir.path(), kind, &format!(r#"{{"kind": "{kind}"}}"#), true);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(first_line(&dir.path().join("out").join(file)), header);
    }
    let spectrum = fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 6);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, cfg, key) in [
        ("rabi", r#"{"kind": "rabl"}"#, "kind"),
        ("rabi", r#"{"kind": "rabi", "dt": -1}"#, "dt"),
        ("susy", r#"{"kind": "susy", "grid": 3}"#, "grid"),
        ("susy", r#"{"kind": "rabi"}"#, "kind"),
        ("rabi", "not json", "config"),
    ] {
        let o = run_with(dir.path(), kind, cfg, false);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(key), "{cfg}");
    }
    let o = lvn(&["rabi", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coarse_step_fails_check_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind": "rabi", "dt": 0.5}"#;
    let o = run_with(dir.path(), "rabi", cfg, true);
    assert_eq!(o.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL purity_drift"), "{stdout}");
    assert!(stdout.contains("PASS trace_drift"), "{stdout}");
    let failed = report(dir.path())["failed"].as_array().unwrap().len();
    assert!(failed > 0);

    // without --check the run still reports but exits 0
    let o = run_with(dir.path(), "rabi", cfg, false);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn lab_frame_reduction_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "reduce", r#"{"kind": "reduce", "frame": "lab", "steps": 400}"#, true);
    assert_eq!(o.status.code(), Some(3));
    let r = report(dir.path());
    assert_eq!(r["checks"]["i_v_variation"]["pass"], false);
}

#[test]
fn non_normalizable_ground_state_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "susy", r#"{"kind": "susy", "lambda": -1}"#, false);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not normalizable"));
}

#[test]
fn out_key_is_used_when_flag_absent() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config");
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, format!(r#"{{"kind": "invariant", "out": {:?}}}"#, target.to_str().unwrap())).unwrap();
    let o = lvn(&["invariant", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(target.join("phases.csv").exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = r#"{"kind": "susy", "points": 801, "x_min": -8, "x_max": 8}"#;
    run_with(a.path(), "susy", cfg, false);
    run_with(b.path(), "susy", cfg, false);
    for f in ["spectrum.csv", "potentials.csv"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap());
    }
    let strip = |v: Value| {
        let mut v = v;
        v.as_object_mut().unwrap().remove("duration_seconds");
        v
    };
    assert_eq!(strip(report(a.path())), strip(report(b.path())));
}

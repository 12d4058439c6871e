use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn wonc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wonc"))
        .args(args)
        .env("WONC_BASELINE_DIR", baselines())
        .output()
        .expect("wonc runs")
}

fn baselines() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/baselines")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn norm_prints_form_value_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"n": 3, "re": [[3,0,0],[0,2,0],[0,0,1]], "im": [[0,0,0],[0,0,0],[0,0,0]]}"#).unwrap();
    let out = wonc(&["norm", "--phi", "pow:2", "--matrix", m.to_str().unwrap(), "--form", "weak"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 3f64.sqrt()).abs() <= 1e-9);
    assert_eq!(v["method"], "closed_form");
    assert!(v["form"].is_string());

    for (form, expected, tol) in [
        ("luxemburg", (14.0f64 / 3.0).sqrt(), 1e-9),
        ("banach", 5.0 / 6f64.sqrt(), 1e-7),
        ("moment", 3.0, 1e-9),
        ("lambda", 3f64.sqrt(), 1e-9),
        ("weak-lp:2", 3f64.sqrt(), 1e-12),
    ] {
        let out = wonc(&["norm", "--phi", "pow:2", "--matrix", m.to_str().unwrap(), "--form", form]);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!((v["value"].as_f64().unwrap() - expected).abs() <= tol, "{form}: {v}");
    }

    let bad = wonc(&["norm", "--phi", "pow:2", "--matrix", m.to_str().unwrap(), "--form", "nope"]);
    assert_eq!(bad.status.code(), Some(2));
    let spectrum = dir.path().join("s.json");
    std::fs::write(&spectrum, r#"{"values": [3, 2, 1], "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333]}"#).unwrap();
    let out = wonc(&["norm", "--phi", "pow:2", "--matrix", spectrum.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn indices_reports_closed_form_and_estimate() {
    let out = wonc(&["indices", "--phi", "plog:2,1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["closed_form"]["lower"], 2.0);
    assert_eq!(v["closed_form"]["upper"], 3.0);
    assert_eq!(v["regime"], "open_strip");
    let out = wonc(&["indices", "--phi", "psin:3,0.2", "--points", "512"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["closed_form"].is_null());
    assert_eq!(v["estimate"]["grid"]["points"], 512);
    assert_eq!(wonc(&["indices", "--phi", "pow:2", "--points", "1"]).status.code(), Some(2));
}

#[test]
fn verify_norms_passes_on_exact_identities() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    let out = wonc(&[
        "verify", "norms", "--phi", "pow:2", "--seed", "1", "--instances", "100", "--dim", "4",
        "--out", out_path.to_str().unwrap(), "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json_file(&out_path)["verdict"], "pass");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.starts_with("index,input_hash,skipped,"));
}

#[test]
fn verify_bg_reproduces_the_committed_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bg.json");
    let out = wonc(&[
        "verify", "bg", "--phi", "plog:3,1", "--levels", "3", "--seed", "42", "--instances", "200",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("reproduced baseline"), "{}", stderr(&out));
    let r = json_file(&out_path);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["envelope"]["source"], "bg__plog_3_1.json");
}

#[test]
fn regime_mismatch_is_informative() {
    let out = wonc(&["verify", "khintchine", "--regime", "low", "--phi", "pow:4", "--instances", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "informative");
    assert!(stderr(&out).contains("regime mismatch"));
}

#[test]
fn envelope_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let base = json_file(&baselines().join("bg__plog_3_1.json"));
    let mut squeezed = base.clone();
    // shrink every recorded ratio so the derived envelope excludes the real run
    for r in squeezed["records"].as_array_mut().unwrap() {
        let v = r["ratios"]["lhs_over_rhs"].as_f64().unwrap();
        r["ratios"]["lhs_over_rhs"] = serde_json::json!(v * 1e-3);
    }
    for k in ["max", "min", "median"] {
        let v = squeezed["aggregate"]["lhs_over_rhs"][k].as_f64().unwrap();
        squeezed["aggregate"]["lhs_over_rhs"][k] = serde_json::json!(v * 1e-3);
    }
    std::fs::write(dir.path().join("bg__plog_3_1.json"), serde_json::to_string_pretty(&squeezed).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wonc"))
        .args(["verify", "bg", "--phi", "plog:3,1", "--baseline-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "fail");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wonc(&["verify", "nosuch", "--phi", "pow:2"]).status.code(), Some(2));
    assert_eq!(wonc(&["verify", "norms", "--phi", "pow:0.5"]).status.code(), Some(2));
    assert_eq!(wonc(&["verify", "norms", "--phi", "pow:2", "--instances", "0"]).status.code(), Some(2));
    assert_eq!(wonc(&["verify", "interp", "--phi", "plog:1.2,0.5"]).status.code(), Some(2));
    assert_eq!(wonc(&["--workers", "0", "indices", "--phi", "pow:2"]).status.code(), Some(2));
    assert_eq!(wonc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn resource_limits_exit_one() {
    let out = wonc(&["verify", "khintchine", "--phi", "plog:3,1", "--k", "13", "--instances", "1"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn worker_count_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for w in ["1", "8"] {
        let p = dir.path().join(format!("k{w}.json"));
        let out = wonc(&["--workers", w, "verify", "khintchine", "--phi", "plog:3,1", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        texts.push(std::fs::read(&p).unwrap());
    }
    let p = dir.path().join("seq.json");
    assert!(wonc(&["--sequential", "verify", "khintchine", "--phi", "plog:3,1", "--out", p.to_str().unwrap()]).status.success());
    texts.push(std::fs::read(&p).unwrap());
    assert!(texts.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn gen_writes_a_reproducible_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"seed": 9, "instances": 3, "dim": 2, "ensemble": "hermitian_gaussian", "scale": 2.0}"#).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = wonc(&["gen", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for i in 0..3 {
        let name = format!("instance_{i:04}.json");
        let x = std::fs::read(a.join(&name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(&name)).unwrap());
        let m: Value = serde_json::from_slice(&x).unwrap();
        assert_eq!(m["n"], 2);
        assert_eq!(m["re"][0][1], m["re"][1][0]);
    }
    // a matrix written by gen feeds straight into norm
    let o = wonc(&["norm", "--phi", "plog:2,1", "--matrix", a.join("instance_0000.json").to_str().unwrap()]);
    assert!(o.status.success());
    std::fs::write(&spec, r#"{"seed": 9, "instances": 0, "dim": 2, "ensemble": "unitary", "scale": 1.0}"#).unwrap();
    assert_eq!(wonc(&["gen", "--spec", spec.to_str().unwrap(), "--out", a.to_str().unwrap()]).status.code(), Some(2));
}

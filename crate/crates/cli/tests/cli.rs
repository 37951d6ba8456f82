use std::path::Path;
use std::process::{Command, Output};

fn orderhull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orderhull"))
        .args(args)
        .env_remove("ORDERHULL_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

const SWEEP: &str = r#"{
    "model": {"kind": "gaussian"},
    "n": [6],
    "N": ["n", "n^2"],
    "ell": [1, "sqrt(N)", "N"],
    "q": [1, "log(N)"],
    "mc": {"n_directions": 8, "n_replicates": 24}
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("sweep.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SWEEP);
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "1", "8"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.csv"));
        let status = orderhull(&[
            "--seed",
            "42",
            "--bit-exact",
            "--threads",
            threads,
            "sweep",
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with("model,p,n,N,ell,q,replicates,directions,estimate,std_error,predictor,ratio,regime,seed"));
}

#[test]
fn sweep_seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SWEEP);
    let a = orderhull(&["--seed", "1", "--bit-exact", "sweep", "--config", &config]);
    let b = orderhull(&["--seed", "2", "--bit-exact", "sweep", "--config", &config]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn sweep_json_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SWEEP);
    let v = json(&orderhull(&["sweep", "--config", &config, "--format", "json"]));
    assert_eq!(v["header"]["version"], "v0.1.0");
    assert_eq!(v["header"]["config"]["model"]["kind"], "gaussian");
    assert!(v["rows"].as_array().unwrap().len() >= 8);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"model": {"kind": "gaussian"}, "n": [], "N": [4], "ell": [1], "q": [1]}"#);
    assert_eq!(orderhull(&["sweep", "--config", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(orderhull(&["sweep", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(orderhull(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(orderhull(&["support", "--model", "cone:0.5", "-n", "3", "-N", "4"]).status.code(), Some(2));
    assert_eq!(
        orderhull(&["support", "--model", "gaussian", "-n", "3", "-N", "4", "--ell", "9"]).status.code(),
        Some(2)
    );
}

#[test]
fn verification_failure_exits_one() {
    let out = orderhull(&["orlicz", "verify", "--law", "gaussian", "--ell", "4", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let ok = orderhull(&["orlicz", "verify", "--law", "constant:1", "--ell", "4"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn support_along_an_axis() {
    let v = json(&orderhull(&[
        "support",
        "--model",
        "cone:1",
        "-n",
        "1",
        "-N",
        "5",
        "--ell",
        "3",
        "--q",
        "2",
        "--direction",
        "-2",
    ]));
    assert_eq!(v["support"], 1.0);
}

#[test]
fn meanwidth_reports_estimate() {
    let v = json(&orderhull(&[
        "--bit-exact",
        "meanwidth",
        "--model",
        "gaussian",
        "-n",
        "4",
        "-N",
        "50",
        "--ell",
        "50",
        "--q",
        "2",
        "--directions",
        "4",
        "--replicates",
        "40",
    ]));
    let value = v["value"].as_f64().unwrap();
    let se = v["std_error"].as_f64().unwrap();
    assert!(value > 0.5 && value < 1.5, "{value}");
    assert!(se > 0.0);
    assert_eq!(v["n_replicates"], 40);
}

#[test]
fn sample_csv_shape() {
    let out = orderhull(&["sample", "--model", "isotropic-ball:2", "-n", "3", "-N", "7", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "x1,x2,x3");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn orlicz_gaussian_breakpoint() {
    let v = json(&orderhull(&["orlicz", "gaussian", "--ell", "1", "--q", "2", "--t", "0,1"]));
    let m = v["M"].as_array().unwrap();
    assert_eq!(m[0], 0.0);
    assert!((m[1].as_f64().unwrap() - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn orlicz_norm_of_ones_matches_inverse() {
    let v = json(&orderhull(&["orlicz", "ones", "--law", "gaussian", "--ell", "2", "--N", "100"]));
    let a = v["norm_of_ones"].as_f64().unwrap();
    let b = v["reciprocal_inverse"].as_f64().unwrap();
    assert!((a / b - 1.0).abs() < 1e-8);
}

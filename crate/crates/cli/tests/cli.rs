use std::process::{Command, Output};

use serde_json::Value;

fn matorth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matorth"))
        .args(args)
        .env_remove("MATORTH_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn symmetry_example_passes() {
    let out = matorth(&["check-symmetry", "--family", "hermite31", "--a", "1", "--t0", "0", "--zeta", "1", "--nmax", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(f(&r["result"]["symmetry"]["max_residual"]) < 1e-10);
    assert_eq!(r["config"]["family_id"], "hermite31");
    assert_eq!(r["config"]["n_max"], 30);
}

#[test]
fn eigenvalues_do_not_depend_on_the_atom() {
    let a = matorth(&["verify-eigen", "--family", "hermite31", "--a", "1", "--zeta", "0", "--n", "12"]);
    let b = matorth(&["verify-eigen", "--family", "hermite31", "--a", "1", "--zeta", "1", "--n", "12"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let blocks = |v: &Value| {
        v["result"]["entries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["gamma_n"].clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(blocks(&json(&a)), blocks(&json(&b)));
}

#[test]
fn mass_direction_matches_root() {
    let out = matorth(&["find-mass", "--family", "hermite31", "--a", "1", "--t0", "3.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let xi = (3.5 + (4.0_f64 + 3.5 * 3.5).sqrt()) / 2.0;
    let norm = (xi * xi + 1.0).sqrt();
    let dir: Vec<f64> = r["result"]["direction"].as_array().unwrap().iter().map(f).collect();
    let sign = dir[1].signum();
    assert!((sign * dir[0] - xi / norm).abs() < 1e-8);
    assert!((sign * dir[1] - 1.0 / norm).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    assert_eq!(matorth(&["check-symmetry", "--family", "nope"]).status.code(), Some(1));
    assert_eq!(matorth(&["check-symmetry", "--family", "hermite31", "--a", "0"]).status.code(), Some(1));
    assert_eq!(matorth(&["check-symmetry", "--family", "jacobi33", "--t0", "-3"]).status.code(), Some(1));
    assert_eq!(matorth(&["bogus-command"]).status.code(), Some(1));
    let tight = matorth(&["check-symmetry", "--family", "laguerre32", "--t0", "0.5", "--zeta", "1", "--tol", "1e-30"]);
    assert_eq!(tight.status.code(), Some(2));
    assert_eq!(json(&tight)["verdict"], false);
    assert_eq!(matorth(&["--help"]).status.code(), Some(0));
}

#[test]
fn tolerance_precedence() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_matorth"));
        cmd.args(["check-symmetry", "--family", "hermite31", "--zeta", "1"]);
        cmd.env_remove("MATORTH_TOL");
        if let Some(e) = env {
            cmd.env("MATORTH_TOL", e);
        }
        if let Some(t) = flag {
            cmd.args(["--tol", t]);
        }
        let out = cmd.output().unwrap();
        (out.status.code(), json(&out)["config"]["tolerance"].as_f64())
    };
    assert_eq!(run(None, None), (Some(0), Some(1e-9)));
    assert_eq!(run(Some("1e-30"), None), (Some(2), Some(1e-30)));
    assert_eq!(run(Some("1e-30"), Some("1e-6")), (Some(0), Some(1e-6)));
    let bad = Command::new(env!("CARGO_BIN_EXE_matorth"))
        .args(["check-symmetry", "--family", "hermite31"])
        .env("MATORTH_TOL", "tiny")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reports_are_byte_stable_with_full_precision() {
    let args = ["cone-reconstruct", "--family", "hermite31", "--gamma", "2", "--zeta", "3", "--t0", "0.7"];
    let a = matorth(&args);
    let b = matorth(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"gamma\": 2.0000000000000000e0"));
    let r: Value = serde_json::from_str(&text).unwrap();
    assert!((f(&r["result"]["decomposition"]["zeta"]) - 3.0).abs() < 1e-8);
}

#[test]
fn density_grid_csv_with_config_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = matorth(&[
        "density-grid",
        "--family",
        "laguerre32",
        "--alpha",
        "0.5",
        "--from",
        "0.5",
        "--to",
        "2",
        "--points",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,entry_11,entry_12,entry_21,entry_22");
    assert_eq!(lines.len(), 5);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.5);
    // t^α e^{-t} (t² + (t-1)²) at t = 1/2 with a = 1.
    let want = 0.5_f64.sqrt() * (-0.5_f64).exp() * 0.5;
    assert!((first[1] - want).abs() < 1e-15);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("grid.csv.config.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["format"], "csv");
    assert_eq!(side["command"], "density-grid");
}

#[test]
fn families_lists_all_ids() {
    let out = matorth(&["families"]);
    assert_eq!(out.status.code(), Some(0));
    let ids: Vec<String> = json(&out)["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["hermite31", "laguerre32", "jacobi33", "general34"]);
}

#[test]
fn fourier_and_basis_reports() {
    let out = matorth(&["fourier-check", "--family", "hermite31", "--a", "2", "--zeta", "1", "--x", "0,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let pts = json(&out)["result"].as_array().unwrap().clone();
    assert_eq!(pts.len(), 2);
    assert!(pts.iter().all(|p| f(&p["deviation"]) < 1e-8));
    assert_eq!(matorth(&["fourier-check", "--family", "laguerre32"]).status.code(), Some(1));

    let basis = json(&matorth(&["find-basis", "--family", "hermite31"]));
    assert_eq!(basis["result"]["dimension"], 4);
    assert_eq!(basis["result"]["eigenfunction_dimension"], 5);
}

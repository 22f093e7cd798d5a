use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn blochx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blochx"))
        .args(args)
        .env_remove("BLOCHX_SEED")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn generators_json_holds_pauli_matrices() {
    let out = blochx(&["generators", "--n", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["blochx_schema"], 1);
    let gens = v["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 3);
    let expected = [
        [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]],
        [[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]],
        [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
    ];
    for (g, e) in gens.iter().zip(expected) {
        let m: Vec<Vec<[f64; 2]>> = serde_json::from_value(g["matrix"].clone()).unwrap();
        assert_eq!(m, e.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    }
}

#[test]
fn bloch_round_trips_through_its_own_output() {
    let dir = tempfile::tempdir().unwrap();
    let ket = dir.path().join("ket.json");
    std::fs::write(&ket, r#"{"ket": [[0.6, 0.0], [0.0, 0.8]]}"#).unwrap();
    let vec_path = dir.path().join("vec.json");
    let mat_path = dir.path().join("mat.json");
    let again = dir.path().join("again.json");

    assert!(blochx(&["bloch", "--state", ket.to_str().unwrap(), "--to-vector", "--out", vec_path.to_str().unwrap()]).status.success());
    assert!(blochx(&["bloch", "--state", vec_path.to_str().unwrap(), "--to-matrix", "--out", mat_path.to_str().unwrap()]).status.success());
    assert!(blochx(&["bloch", "--state", mat_path.to_str().unwrap(), "--out", again.to_str().unwrap()]).status.success());

    let a = read_json(&vec_path);
    let b = read_json(&again);
    assert!((f(&a["norm"]) - 1.0).abs() < 1e-12);
    assert_eq!(a["is_state"], true);
    for (x, y) in a["coords"].as_array().unwrap().iter().zip(b["coords"].as_array().unwrap()) {
        assert!((f(x) - f(y)).abs() < 1e-12);
    }
    // sigma_2 component of (0.6, 0.8i): 2 Im(conj(a) b) = 0.96
    assert!((f(&a["coords"][1]) - 0.96).abs() < 1e-12);
    let m = read_json(&mat_path);
    assert!(m["ket"].is_array());
}

#[test]
fn measure_report_schema_and_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("psi.json");
    let h = 0.5f64.sqrt();
    std::fs::write(&state, format!(r#"{{"ket": [[{h}, 0], [{h}, 0]]}}"#)).unwrap();
    let out = dir.path().join("report.json");
    let status = blochx(&[
        "measure", "--s", "0.5", "--direction", "0,0,1", "--state", state.to_str().unwrap(), "--samples", "20000", "--seed", "42",
        "--trajectory-steps", "5", "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v = read_json(&out);
    for key in ["born", "empirical", "max_dev", "records_sample", "std_errors", "counts"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["seed"], 42);
    assert_eq!(v["records_sample"].as_array().unwrap().len(), 10);
    assert!(f(&v["max_dev"]) < 0.02);
    let csv = std::fs::read_to_string(dir.path().join("report.trajectory.csv")).unwrap();
    assert!(csv.starts_with("tau,coord_0,coord_1,coord_2\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn measure_defaults_and_composite() {
    let out = blochx(&["measure", "--s1", "0.5", "--s2", "0.5", "--samples", "1000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["groups"].as_array().unwrap().len(), 3);
    assert!((f(&v["born"][1]) - 0.5).abs() < 1e-12);
}

#[test]
fn verify_report_and_exit_codes() {
    let out = blochx(&["verify", "--prop", "1", "--s", "1.5", "--trials", "20", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trials"], 20);
    assert_eq!(v["pass"], true);
    assert!(f(&v["max_deviation"]) < 1e-9);

    let strict = blochx(&["verify", "--prop", "2bis", "--s1", "0.5", "--s2", "1", "--trials", "5", "--tolerance", "1e-300"]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn usage_errors_are_one_line() {
    let out = blochx(&["measure", "--s", "0.4"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("invalid spin"));

    let out = blochx(&["compose", "--s1", "0.5", "--s2", "0.5", "--direction", "a,b,c"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--direction"));

    let out = blochx(&["generators", "--n", "2", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_blochx"))
        .args(["measure", "--s", "1", "--samples", "10"])
        .env("BLOCHX_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn compose_and_spin_reports() {
    let dir = tempfile::tempdir().unwrap();
    let emit = dir.path().join("obs.json");
    assert!(blochx(&["spin", "--s", "1", "--direction", "1,0,0", "--emit", emit.to_str().unwrap()]).status.success());
    let v = read_json(&emit);
    let eig: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    for (x, e) in eig.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((x - e).abs() < 1e-12);
    }

    let out = blochx(&["compose", "--s1", "0.5", "--s2", "0.5", "--basis", "product"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    assert_eq!(v["basis"], "product");
    assert!(f(&v["unitarity_residual"]) < 1e-10);
}

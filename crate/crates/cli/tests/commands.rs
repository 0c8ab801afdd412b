use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fuchsnorm"));
    cmd.env_remove("FUCHSNORM_TOL").env_remove("FUCHSNORM_RESONANCE_TOL");
    cmd
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], doc: &Path) -> (Option<i32>, Value, Output) {
    let out = bin().args(args).arg(doc).output().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), report, out)
}

const SCALAR: &str = r#"{"d": 1, "S": 0, "poles": [-1, 1], "matrices": [[[1]], [[1]]],
    "nonlinearity": [{"multiindex": [2], "coeff": [[1]]}],
    "rhs": [[0], [0], [1]]}"#;

#[test]
fn check_passes_fails_and_rejects_malformed_documents() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", SCALAR);
    let (code, report, _) = run(&["check"], &good);
    assert_eq!(code, Some(0));
    assert_eq!(report["passed"], Value::Bool(true));

    let resonant = write(
        dir.path(),
        "resonant.json",
        r#"{"d": 2, "S": 0, "poles": [-1, 1], "matrices": [[[2, 0], [0, 1]], [[1, 0], [0, "3/2"]]]}"#,
    );
    let (code, report, _) = run(&["check"], &resonant);
    assert_eq!(code, Some(2));
    let v = &report["nonlinear"]["violations"][0];
    assert_eq!(v["residue"], "0");
    assert_eq!(v["multiindex"], serde_json::json!([0, 2]));

    let malformed = write(dir.path(), "bad.json", r#"{"d": 1, "S": 0, "poles": [-1, 1], "matrices": [[[1]]]}"#);
    let (code, _, out) = run(&["check"], &malformed);
    assert_eq!(code, Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/matrices"));
}

#[test]
fn polys_dump_matches_the_scalar_family() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "scalar.json", SCALAR);
    let (code, report, _) = run(&["polys", "--exact", "--n", "2"], &doc);
    assert_eq!(code, Some(0));
    let p2 = &report["polys"][2];
    assert_eq!(p2["coeffs"], serde_json::json!([[[["-6", "0"]]], [[["0", "0"]]], [[["30", "0"]]]]));
    assert_eq!(p2["leading"], serde_json::json!([[["30", "0"]]]));
    assert_eq!(report["polys"][1]["coeffs"][1], serde_json::json!([[["4", "0"]]]));
}

#[test]
fn correct_solves_the_quadratic_example() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "scalar.json", SCALAR);
    let (code, report, _) = run(&["correct", "--exact"], &doc);
    assert_eq!(code, Some(0));
    assert_eq!(report["phi"], serde_json::json!([[["1/3", "0"]]]));
    assert_eq!(report["y"], serde_json::json!([[["0", "0"]], [["1/3", "0"]]]));

    let (code, report, _) = run(&["correct", "--analytic"], &doc);
    assert_eq!(code, Some(0));
    let re = report["phi"][0][0][0].as_f64().unwrap();
    assert!((re - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(report["certificate"]["passed"], Value::Bool(true));
}

#[test]
fn linearize_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "scalar.json", SCALAR);
    let (code, report, _) = run(&["linearize", "--exact", "--order", "6"], &doc);
    assert_eq!(code, Some(0));
    assert_eq!(report["correction"], serde_json::json!([{"multiindex": [2], "coeff": [[["1", "0"]]]}]));
    assert_eq!(report["h"], serde_json::json!([]));
    assert_eq!(report["verify"]["passed"], Value::Bool(true));

    let empty = write(dir.path(), "empty.json", r#"{"d": 1, "S": 0, "poles": [-1, 1], "matrices": [[[1]], [[1]]]}"#);
    let (code, report, _) = run(&["normal-form", "--exact"], &empty);
    assert_eq!(code, Some(0));
    assert_eq!(report["correction"], serde_json::json!([]));
    assert_eq!(report["h"], serde_json::json!([]));

    let xsq = write(
        dir.path(),
        "xsq.json",
        r#"{"d": 1, "S": 0, "poles": [-1, 1], "matrices": [[[1]], [[1]]],
            "nonlinearity": [{"multiindex": [2], "coeff": [[0], [1]]}]}"#,
    );
    let tables = dir.path().join("tables.json");
    let out = bin().args(["linearize", "--exact", "--order", "4", "--out"]).arg(&tables).arg(&xsq).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (code, _, _) = run(&["verify", "--exact", "--order", "4", "--tables", tables.to_str().unwrap()], &xsq);
    assert_eq!(code, Some(0));

    let mut stored: Value = serde_json::from_str(&std::fs::read_to_string(&tables).unwrap()).unwrap();
    stored["h"][0]["coeff"][0][0] = serde_json::json!(["3/2", "0"]);
    std::fs::write(&tables, stored.to_string()).unwrap();
    let (code, report, _) = run(&["verify", "--exact", "--order", "4", "--tables", tables.to_str().unwrap()], &xsq);
    assert_eq!(code, Some(4));
    assert_eq!(report["verify"]["passed"], Value::Bool(false));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "two.json",
        r#"{"d": 2, "S": 1, "poles": [-1, [0, 1], 1],
            "matrices": [[[0.5, 1], [0, 0.75]], [[1.25, 0], [0.5, 0.6]], [[1, 0], [0, 1.5]]],
            "nonlinearity": [{"multiindex": [1, 1], "coeff": [[1, 0], [0, 1]]}],
            "options": {"order": 4}}"#,
    );
    let first = bin().arg("normal-form").arg(&doc).output().unwrap();
    let second = bin().arg("normal-form").arg(&doc).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn toml_documents_and_env_tolerances_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "scalar.toml",
        "d = 1\nS = 0\npoles = [-1, 1]\nmatrices = [[[1]], [[1]]]\nrhs = [[0], [0], [1]]\n",
    );
    let (code, report, _) = run(&["correct", "--exact"], &doc);
    assert_eq!(code, Some(0));
    assert_eq!(report["phi"], serde_json::json!([[["1/3", "0"]]]));

    let near = write(
        dir.path(),
        "near.json",
        r#"{"d": 2, "S": 0, "poles": [-1, 1], "matrices": [[[2.000001, 0], [0, 1]], [[1, 0], [0, 1.5]]]}"#,
    );
    let out = bin().arg("check").arg(&near).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin().env("FUCHSNORM_RESONANCE_TOL", "1e-4").arg("check").arg(&near).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

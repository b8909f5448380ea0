use std::process::{Command, Output};

use serde_json::Value;

fn crobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crobs"))
        .args(args)
        .output()
        .expect("spawn crobs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn invariant<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["name"] == name)
        .unwrap()
}

const ZERO: &str = r#"{"truncation": 8, "coefficients": []}"#;

#[test]
fn compute_sphere_jet() {
    let o = crobs(&[
        "compute",
        "--input",
        ZERO,
        "--backend",
        "jet",
        "--order",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let rt = &invariant(&r, "R_tilde")["coefficients"][0]["coefficients"];
    assert_eq!(rt.as_array().unwrap().len(), 1);
    assert_eq!(rt[0]["re"], "2");
    for name in ["Q11", "O_tilde"] {
        for c in invariant(&r, name)["coefficients"].as_array().unwrap() {
            assert!(c["coefficients"].as_array().unwrap().is_empty(), "{name}");
        }
    }
}

#[test]
fn compute_sphere_grid() {
    let o = crobs(&[
        "compute",
        "--input",
        ZERO,
        "--degree",
        "4",
        "--bandwidth",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let st = &invariant(&r, "R_tilde")["stats"];
    assert!((st["mean_re"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(
        invariant(&r, "O_tilde")["stats"]["max_abs"]
            .as_f64()
            .unwrap()
            < 1e-12
    );
}

#[test]
fn compute_from_file_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("phi.json");
    let out = dir.path().join("report.json");
    std::fs::write(
        &input,
        r#"{"truncation": 4, "coefficients": [{"p": 2, "q": 0, "m": 1, "re": "1/100"}]}"#,
    )
    .unwrap();
    let o = crobs(&[
        "compute",
        "--input",
        input.to_str().unwrap(),
        "--backend",
        "jet",
        "--degree",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["backend"], "jet");
    assert!(r["identity_residual"]
        .as_array()
        .unwrap()
        .iter()
        .all(|s| s == "0"));
}

#[test]
fn malformed_input() {
    let o = crobs(&[
        "compute",
        "--input",
        "{\"truncation\": 4,\n \"coefficients\": [",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = crobs(&["compute", "--input", "/nonexistent/phi.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn grid_rejects_large_phi() {
    let phi = r#"{"truncation": 4, "coefficients": [{"p": 0, "q": 0, "m": 0, "re": "1.5"}]}"#;
    let o = crobs(&["compute", "--input", phi, "--degree", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid node"), "{}", stderr(&o));
}

#[test]
fn verify_exit_codes() {
    let o = crobs(&["verify", "kernel", "--degree", "4"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let o = crobs(&["verify", "bounds", "--pmax", "10"]);
    assert_eq!(o.status.code(), Some(0));
    // The quoted H_{p,1} eigenvalue differs from the operator's.
    let o = crobs(&["verify", "spectra", "--degree", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(
        table.contains("PASS H(4,0)") && table.contains("FAIL H(3,1)"),
        "{table}"
    );
}

#[test]
fn verify_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = crobs(&[
            "verify",
            "identity",
            "--count",
            "2",
            "--seed",
            "11",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stdout)
        );
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let r: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(r[0]["seed"], 11);
}

#[test]
fn solve_zero() {
    let o = crobs(&["solve", "--phi0", ZERO]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["converged"], true);
    assert_eq!(r["psi_norm"], 0.0);
    let o = crobs(&["solve", "--phi0", ZERO, "--backend", "jet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn solve_errors() {
    let outside = r#"{"truncation": 8, "coefficients": [{"p": 0, "q": 4, "m": 0, "re": "0.01"}]}"#;
    let o = crobs(&["solve", "--phi0", outside]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let phi = r#"{"truncation": 8, "coefficients": [{"p": 2, "q": 0, "m": 1, "re": "0.01"}]}"#;
    let o = crobs(&["solve", "--phi0", phi, "--tol", "1e-30", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["converged"], false);
    let o = crobs(&[
        "kuranishi",
        "--phi0",
        phi,
        "--tol",
        "1e-30",
        "--max-iter",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kuranishi_scales_quadratically() {
    let mut norms = Vec::new();
    for eps in ["0.01", "0.005"] {
        let phi = format!(
            r#"{{"truncation": 8, "coefficients": [{{"p": 2, "q": 0, "m": 0, "re": "{eps}"}}]}}"#
        );
        let o = crobs(&["kuranishi", "--phi0", &phi]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        norms.push(json(&o)["kuranishi_norm"].as_f64().unwrap());
    }
    assert!(norms[1] > 0.0);
    assert!((norms[0] / norms[1] - 4.0).abs() < 0.05, "{norms:?}");
}

#[test]
fn rigidity_unit_constant() {
    let u = r#"{"truncation": 4, "coefficients": [{"p": 0, "q": 0, "m": 0, "re": "1/2"}]}"#;
    let ud =
        r#"{"truncation": 4, "coefficients": [{"p": 1, "q": 2, "m": 0, "re": "3", "im": "-1/5"}]}"#;
    let o = crobs(&["rigidity", "--phidot", u, "--phiddot", ud]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["value"], "48");
    assert_eq!(r["independent_of_uddot"], true);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specnet"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn validate(text: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/schema/network-document.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let instance: Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = v.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn build_airy_emits_json_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("airy.json");
    let svg = dir.path().join("airy.svg");
    let airy = config("airy.json");
    let o = run(&[
        "build",
        "--input",
        airy.to_str().unwrap(),
        "--theta",
        "0.1",
        "--out-json",
        json.to_str().unwrap(),
        "--out-svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    validate(&text);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["walls"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<path").count(), 3);
}

#[test]
fn obstructed_build_exits_two() {
    let input = config("two_point.json");
    let o = run(&["build", "--input", input.to_str().unwrap(), "--theta", "0.25"]);
    assert_eq!(code(&o), 2);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("3.14159"), "{stderr}");
    let text = String::from_utf8(o.stdout).unwrap();
    validate(&text);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["obstructions"]["closedTrees"].as_array().unwrap().len(), 1);
}

#[test]
fn scan_theta_prints_an_unobstructed_phase() {
    let input = config("two_point.json");
    let o = run(&[
        "scan-theta",
        "--input",
        input.to_str().unwrap(),
        "--theta",
        "0.25",
        "--epsilon",
        "0.05",
    ]);
    assert_eq!(code(&o), 0);
    let theta = String::from_utf8(o.stdout).unwrap().trim().to_string();
    let t: f64 = theta.parse().unwrap();
    assert!((0.0..1.0).contains(&t));
    let o = run(&["build", "--input", input.to_str().unwrap(), "--theta", &theta]);
    assert_eq!(code(&o), 0);
}

#[test]
fn check_gmn_verdicts() {
    let o = run(&["check-gmn", "--input", config("cubic.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], Value::Bool(true));

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.json");
    std::fs::write(
        &flat,
        r#"{"K": 2, "phi": [[0], [1]], "punctures": {"infinity": true}, "theta": 0}"#,
    )
    .unwrap();
    let o = run(&["check-gmn", "--input", flat.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["hasBranchPoint"], Value::Bool(false));
}

#[test]
fn nonabelianize_records_monodromies() {
    let input = config("cubic.json");
    let o = run(&[
        "nonabelianize",
        "--input",
        input.to_str().unwrap(),
        "--loops",
        "circle:3,0.5,0.6",
        "--basepoint",
        "3.6,0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    validate(&text);
    let doc: Value = serde_json::from_str(&text).unwrap();
    let m = &doc["monodromies"][0];
    assert_eq!(m["loop"], "circle:3,0.5,0.6");
    assert_eq!(m["basepoint"][0].as_f64(), Some(3.6));
    assert_eq!(m["basepoint"][1].as_f64(), Some(0.5));
    // a small circle clear of the network: the identity
    for i in 0..3 {
        for j in 0..3 {
            let terms = m["matrix"][i][j].as_array().unwrap();
            if i == j {
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0][1], "1");
            } else {
                assert!(terms.is_empty());
            }
        }
    }
    assert!(doc["trees"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t.get("factor").is_some()));
}

#[test]
fn complex_solver_writes_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let input = config("cubic_complex.json");
    let o = run(&[
        "nonabelianize",
        "--input",
        input.to_str().unwrap(),
        "--out-json",
        out.to_str().unwrap(),
        "--out-svg",
        dir.path().join("c.svg").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    validate(&text);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert!(doc["trees"][0]["factor"].is_array());
}

#[test]
fn render_matches_build_svg() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("n.json");
    let svg = dir.path().join("n.svg");
    let input = config("cubic.json");
    let o = run(&[
        "build",
        "--input",
        input.to_str().unwrap(),
        "--out-json",
        json.to_str().unwrap(),
        "--out-svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&["render", "--input", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        std::fs::read_to_string(&svg).unwrap()
    );
}

#[test]
fn runs_are_byte_identical() {
    let input = config("cubic.json");
    let args = ["nonabelianize", "--input", input.to_str().unwrap()];
    let a = bin().args(args).env("SPECNET_THREADS", "1").output().unwrap();
    let b = bin().args(args).env("SPECNET_THREADS", "4").output().unwrap();
    let c = bin().args(args).output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"K": 2, "phi": [[0], [0, 1]], "punctures": {"infinity": true}, "theta": 0.1, "typo": 1}"#,
    )
    .unwrap();
    let o = run(&["build", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("typo"));

    let o = run(&["build", "--input", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let o = run(&[
        "build",
        "--input",
        config("airy.json").to_str().unwrap(),
        "--theta",
        "1.5",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("VALIDATION_ERROR at theta"));

    let o = run(&[
        "nonabelianize",
        "--input",
        config("airy.json").to_str().unwrap(),
        "--loops",
        "square:1",
    ]);
    assert_eq!(code(&o), 1);
}

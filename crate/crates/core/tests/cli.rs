use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn torsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsion")).args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn fixture(rel: &str) -> String {
    format!("{}/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn verify_is_deterministic() {
    let a = torsion(&["--seed", "3", "verify"]);
    let b = torsion(&["--seed", "3", "verify"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report = stdout_json(&a);
    assert_eq!(report["version"], 1);
    assert_eq!(report["failed"], 0);
}

#[test]
fn verify_filter_selects_family_or_fixture() {
    let fam = stdout_json(&torsion(&["verify", "--filter", "rho"]));
    assert_eq!(fam["families"].as_array().unwrap().len(), 1);
    assert_eq!(fam["families"][0]["family"], "rho");

    let one = stdout_json(&torsion(&["verify", "--filter", "two-term-2"]));
    assert_eq!(one["total"], 1);

    let missing = torsion(&["verify", "--filter", "no-such-thing"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(stdout_json(&missing)["error"], "FixtureNotFound");
}

#[test]
fn corrupted_fixture_reports_not_a_complex() {
    let dir: PathBuf = std::env::temp_dir().join(format!("torsion-cli-broken-{}", std::process::id()));
    fs::create_dir_all(dir.join("complexes")).unwrap();
    let broken = json!({
        "version": 1,
        "dims": [1, 1, 1],
        "differentials": [
            {"rows": 1, "cols": 1, "entries": ["1"]},
            {"rows": 1, "cols": 1, "entries": ["1"]}
        ]
    });
    fs::write(dir.join("complexes/broken.json"), broken.to_string()).unwrap();
    let manifest = json!({"fixtures": [{
        "name": "broken",
        "family": "torsion",
        "kind": "complex",
        "path": "complexes/broken.json",
        "source": "oracle",
        "expected": {"torsion": "1", "betti": [0, 0, 0]}
    }]});
    fs::write(dir.join("manifest.json"), manifest.to_string()).unwrap();

    let out = torsion(&["verify", "--filter", "torsion", "--fixtures", dir.to_str().unwrap()]);
    fs::remove_dir_all(&dir).ok();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("NotAComplex"), "{text}");
    assert!(text.contains("broken"), "{text}");
}

#[test]
fn compute_torsion_of_shipped_complex() {
    let out = torsion(&["torsion", "compute", "--complex", &fixture("complexes/three-degree.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["torsion"]["value"], "5/2");
    assert_eq!(v["betti"], json!([0, 0, 0]));
}

#[test]
fn trivial_phases_have_zero_rho() {
    let out = torsion(&["invariants", "rho", "--phases", &fixture("phases/identity.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["rho"], "0");
}

#[test]
fn lie_check_within_tolerance() {
    let out = torsion(&["lie", "check", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(torsion(&["bogus"]).status.code(), Some(2));
    assert_eq!(torsion(&["asymptotics", "leading", "--form", "nope"]).status.code(), Some(2));
}

#[test]
fn missing_input_file_is_an_error() {
    let out = torsion(&["torsion", "compute", "--complex", "/nonexistent/complex.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"], "InputError");
}

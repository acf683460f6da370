//! Golden-file and exit-code tests of the `finsler` binary.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).current_dir(root()).output().unwrap()
}

fn golden(name: &str, args: &[&str], code: i32) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, String::from_utf8(run(args).stdout).unwrap(), "{name}: output is not reproducible");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(text == want, "{name} differs from its golden file");
    text
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn tensors_euclid() {
    let doc = json(&golden("tensors_euclid.json", &["tensors", "--def", "corpus/euclid.fin", "--x", "0,0", "--y", "3,4"], 0));
    assert_eq!(doc["tensors"]["g"], serde_json::json!([1.0, 0.0, 0.0, 1.0]));
    assert_eq!(doc["tensors"]["G"], serde_json::json!([0.0, 0.0]));
    assert_eq!(doc["shapes"]["g"], serde_json::json!([2, 2]));
    assert_eq!(doc["kinds"].as_object().unwrap().len(), 6);
}

#[test]
#[allow(clippy::approx_constant)]
fn tensors_sphere_chern_rund() {
    let args = ["tensors", "--def", "corpus/sphere.fin", "--x", "1.0472,0", "--y", "0,1", "--kind", "chern-rund"];
    let doc = json(&golden("tensors_sphere.json", &args, 0));
    // Γ^0_11 = −sin x0 cos x0, stored [a, i, j].
    let g011 = doc["tensors"]["Gamma"][3].as_f64().unwrap();
    let want = -(1.0472f64.sin() * 1.0472f64.cos());
    assert!((g011 - want).abs() < 1e-12, "{g011} vs {want}");
    assert!((g011 + 0.433013).abs() < 1e-5);
    assert!(doc["kinds"]["chern-rund"]["tensors"]["H"].is_array());
}

#[test]
fn verify_sphere_passes() {
    let args = ["verify", "--def", "corpus/sphere.fin", "--samples", "50", "--seed", "7", "--tol", "1e-7"];
    let doc = json(&golden("verify_sphere.json", &args, 0));
    assert_eq!(doc["summary"]["all_pass"], true);
    assert!(doc["summary"]["identities"].as_u64().unwrap() >= 40);
}

#[test]
fn verify_broken_flags_euler_check() {
    let args = ["verify", "--def", "corpus/broken_inhomogeneous.fin", "--samples", "10", "--seed", "7"];
    let doc = json(&golden("verify_broken.json", &args, 1));
    let ids = doc["identities"].as_array().unwrap();
    let euler = ids.iter().find(|r| r["id"] == "euler-check").unwrap();
    assert_eq!(euler["status"], "fail");
}

#[test]
fn classify_const_randers() {
    let args = ["classify", "--def", "corpus/randers_const.fin", "--samples", "100", "--seed", "1"];
    let doc = json(&golden("classify_randers_const.json", &args, 0));
    assert_eq!(doc["criteria"]["berwald"]["verdict"], "holds");
    assert_eq!(doc["criteria"]["locally-minkowski"]["verdict"], "holds");
    assert_eq!(doc["criteria"]["pseudo-riemannian"]["verdict"], "fails");
    assert!(doc["criteria"]["pseudo-riemannian"]["witness"]["point"].is_object());
    assert_eq!(doc["scope"], "verdicts hold on 100 samples");
}

#[test]
fn classify_euclid() {
    let doc = json(&golden("classify_euclid.json", &["classify", "--def", "corpus/euclid.fin"], 0));
    for (_, c) in doc["criteria"].as_object().unwrap() {
        assert_eq!(c["verdict"], "holds");
    }
}

fn last_row(csv: &str) -> Vec<f64> {
    csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect()
}

#[test]
fn geodesic_euclid() {
    let args = ["geodesic", "--def", "corpus/euclid.fin", "--x", "0,0", "--y", "1,2", "--t", "3", "--samples", "31"];
    let csv = golden("geodesic_euclid.csv", &args, 0);
    assert!(csv.starts_with("t,x0,x1,y0,y1,L\n"));
    assert_eq!(csv.lines().count(), 32);
    let row = last_row(&csv);
    assert!((row[1] - 3.0).abs() <= 1e-12 && (row[2] - 6.0).abs() <= 1e-12);
}

#[test]
fn geodesic_sphere_equator() {
    let args =
        ["geodesic", "--def", "corpus/sphere.fin", "--x", "1.5707963267948966,0", "--y", "0,1", "--t", "3.141592653589793"];
    let csv = golden("geodesic_sphere.csv", &args, 0);
    for line in csv.lines().skip(1) {
        let x0: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((x0 - std::f64::consts::FRAC_PI_2).abs() <= 1e-9);
    }
}

#[test]
fn geodesic_with_transport() {
    let args = [
        "geodesic", "--def", "corpus/sphere.fin", "--x", "1.2,0.3", "--y", "0.2,1", "--t", "2", "--samples", "11",
        "--transport", "0.2,1",
    ];
    let csv = golden("transport_sphere.csv", &args, 0);
    assert!(csv.starts_with("t,x0,x1,y0,y1,V0,V1,L\n"));
    // The velocity transports to itself.
    let row = last_row(&csv);
    assert!((row[3] - row[5]).abs() < 1e-9 && (row[4] - row[6]).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["verify", "--def", "corpus/sphere.fin", "--tol", "-1"]), 2);
    assert_eq!(code(&["verify", "--def", "corpus/sphere.fin", "--samples", "0"]), 2);
    assert_eq!(code(&["verify", "--def", "corpus/sphere.fin", "--kind", "levi-civita"]), 2);
    assert_eq!(code(&["classify", "--def", "corpus/nope.fin"]), 2);
    assert_eq!(code(&["geodesic", "--def", "corpus/euclid.fin", "--x", "0,0", "--y", "1,2", "--t", "0"]), 2);
    assert_eq!(code(&["tensors", "--def", "corpus/euclid.fin", "--x", "0,0,0", "--y", "1,2,3"]), 2);
    assert_eq!(code(&["tensors", "--def", "corpus/euclid.fin", "--x", "a,0", "--y", "1,2"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    // Singular metric on the sphere's axis.
    assert_eq!(code(&["tensors", "--def", "corpus/sphere.fin", "--x", "0,0", "--y", "1,1"]), 3);
    assert_eq!(code(&["tensors", "--def", "corpus/sphere.fin", "--x", "1,0", "--y", "0,0"]), 3);
    assert_eq!(code(&["verify", "--def", "corpus/broken_inhomogeneous.fin", "--samples", "5"]), 1);

    let out = run(&["tensors", "--def", "corpus/malformed.fin", "--x", "0,0", "--y", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn report_goes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("finsler-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("c.json");
    let o = out.to_str().unwrap();
    let r = run(&["classify", "--def", "corpus/euclid.fin", "--samples", "5", "--out", o]);
    assert_eq!(r.status.code(), Some(0));
    assert!(r.stdout.is_empty());
    let doc = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(doc["header"]["config"]["samples"], 5);
    assert_eq!(doc["header"]["definition"]["sha256"].as_str().unwrap().len(), 64);
    std::fs::remove_dir_all(dir).unwrap();
}

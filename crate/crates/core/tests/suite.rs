use finsler_core::sampling::{sample_points, SampleBox};
use finsler_core::verify::{run_suite, Status};
use finsler_core::LagrangianDef;

fn corpus(name: &str) -> LagrangianDef {
    let path = format!("{}/../../corpus/{name}.fin", env!("CARGO_MANIFEST_DIR"));
    LagrangianDef::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check(name: &str, samples: usize, tol: f64) {
    let def = corpus(name);
    let pts = sample_points(def.dim, samples, 7, SampleBox::DEFAULT);
    let rep = run_suite(&def, &pts, tol).unwrap();
    let mut bad = Vec::new();
    for r in &rep.identities {
        if r.status == Status::Fail {
            bad.push(format!("{}: max {:.3e} at {:?}", r.id, r.max, r.argmax));
        }
    }
    assert!(rep.point_errors.is_empty(), "{name}: {:?}", rep.point_errors);
    assert!(bad.is_empty(), "{name}:\n{}", bad.join("\n"));
}

#[test]
fn euclid_suite() {
    check("euclid", 20, 1e-8);
}

#[test]
fn sphere_suite() {
    check("sphere", 50, 1e-7);
}

#[test]
fn randers_suite() {
    check("randers_pos", 50, 1e-7);
}

#[test]
fn randers_const_suite() {
    check("randers_const", 50, 1e-7);
}

#[test]
fn lorentz_suite() {
    check("lorentz", 20, 1e-7);
}

#[test]
fn randers3_suite() {
    check("randers3", 10, 1e-7);
}

use finsler_core::classify::{classify_space, criterion_residual, Criterion, Thresholds, Verdict};
use finsler_core::sampling::SampleBox;
use finsler_core::{ClassifyError, LagrangianDef, PointGeometry, TangentPoint};

fn corpus(name: &str) -> LagrangianDef {
    let path = format!("{}/../../corpus/{name}.fin", env!("CARGO_MANIFEST_DIR"));
    LagrangianDef::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(name: &str) -> finsler_core::classify::Classification {
    classify_space(&corpus(name), 30, 5, SampleBox::DEFAULT, Thresholds::default()).unwrap()
}

#[test]
fn euclid_satisfies_everything() {
    let rep = run("euclid");
    for c in Criterion::ALL {
        assert_eq!(rep.verdict(c), Verdict::Holds, "{}", c.id());
    }
    assert!(rep.skipped.is_empty());
    assert!(rep.point_cond.iter().all(|c| c.is_some_and(|c| (c - 1.0).abs() < 1e-12)));
}

#[test]
fn constant_randers_is_minkowski_but_not_riemannian() {
    let rep = run("randers_const");
    assert_eq!(rep.verdict(Criterion::Berwald), Verdict::Holds);
    assert_eq!(rep.verdict(Criterion::Landsberg), Verdict::Holds);
    assert_eq!(rep.verdict(Criterion::LocallyMinkowski), Verdict::Holds);
    assert_eq!(rep.verdict(Criterion::PseudoRiemannian), Verdict::Fails);
    assert_eq!(rep.verdict(Criterion::WeaklyRiemannian), Verdict::Fails);
}

#[test]
fn sphere_is_riemannian_and_curved() {
    let rep = run("sphere");
    assert_eq!(rep.verdict(Criterion::PseudoRiemannian), Verdict::Holds);
    assert_eq!(rep.verdict(Criterion::Berwald), Verdict::Holds);
    assert_eq!(rep.verdict(Criterion::LocallyMinkowski), Verdict::Fails);

    let def = corpus("sphere");
    let p = TangentPoint::new(vec![std::f64::consts::FRAC_PI_3, 0.0], vec![0.0, 1.0]);
    let r = PointGeometry::new(&def, &p).unwrap().curvature.value().unwrap();
    // Unit curvature: R^a_jk = δ^a_j g_bk y^b − δ^a_k g_bj y^b, so R^0_01 = sin²θ.
    assert!((r[[0, 0, 1]] - 0.75).abs() < 1e-10, "{}", r[[0, 0, 1]]);
    assert!((r.max_abs() - 0.75).abs() < 1e-10);
}

#[test]
fn non_closed_randers_is_not_berwald() {
    let rep = run("randers_pos");
    assert_eq!(rep.verdict(Criterion::Berwald), Verdict::Fails);
    assert_eq!(rep.verdict(Criterion::LocallyMinkowski), Verdict::Fails);
    assert!(rep.chain_violations().is_empty());
}

#[test]
fn witnesses_reproduce() {
    for name in ["randers_pos", "randers3", "sphere"] {
        let def = corpus(name);
        let rep = classify_space(&def, 20, 3, SampleBox::DEFAULT, Thresholds::default()).unwrap();
        for r in rep.criteria.iter().filter(|r| r.verdict == Verdict::Fails) {
            let (_, p) = r.witness.as_ref().unwrap();
            let again = criterion_residual(&def, r.criterion, p).unwrap();
            assert!((again - r.max).abs() <= 1e-12, "{name} {}: {again} vs {}", r.criterion.id(), r.max);
        }
    }
}

#[test]
fn deterministic() {
    assert_eq!(run("randers3"), run("randers3"));
}

#[test]
fn too_many_unusable_points() {
    let def = LagrangianDef::parse("dim: 2\nranders: a = [1, 0; 0, 1]; b = [x0, 0]\n").unwrap();
    let err = classify_space(&def, 20, 1, SampleBox::DEFAULT, Thresholds::default()).unwrap_err();
    assert!(matches!(err, ClassifyError::TooManySkipped { total: 20, .. }), "{err}");
}

use std::f64::consts::PI;

use finsler_core::curvature::{self, landsberg, nonlinear_curvature, torsion_projections, volume_derivatives};
use finsler_core::geometry::ConnectionKind;
use finsler_core::lagrangian::{cartan, eval_l, euler_check, metric};
use finsler_core::spray::{self, covariant_deriv, Direction, Field};
use finsler_core::{LagrangianDef, TangentPoint};
use finsler_core::sampling::{sample_points, SampleBox};

fn corpus(name: &str) -> LagrangianDef {
    let path = format!("{}/../../corpus/{name}.fin", env!("CARGO_MANIFEST_DIR"));
    LagrangianDef::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn pt(x: &[f64], y: &[f64]) -> TangentPoint {
    TangentPoint::new(x.to_vec(), y.to_vec())
}

#[test]
fn sphere_spray_and_christoffel() {
    let d = corpus("sphere");
    let p = pt(&[PI / 3.0, 0.0], &[0.0, 1.0]);
    let s = spray::spray(&d, &p).unwrap();
    let r3 = 3f64.sqrt();
    assert!((s.g0[[0]] + r3 / 8.0).abs() < 1e-14, "{}", s.g0[[0]]);
    assert!(s.g0[[1]].abs() < 1e-14);
    assert!((s.g1[[0, 1]] + r3 / 4.0).abs() < 1e-14);
    let gam = spray::gamma_coeffs(&d, &p).unwrap();
    assert!((gam[[0, 1, 1]] + r3 / 4.0).abs() < 1e-13);
    assert!((gam[[1, 0, 1]] - 1.0 / r3).abs() < 1e-13);
    assert!((gam[[1, 1, 0]] - 1.0 / r3).abs() < 1e-13);
    assert!(s.g3.max_abs() < 1e-12);
}

#[test]
fn sphere_curvatures() {
    let d = corpus("sphere");
    let p = pt(&[PI / 3.0, 0.0], &[0.0, 1.0]);
    let r = nonlinear_curvature(&d, &p).unwrap();
    assert!((r[[0, 0, 1]].abs() - 0.75).abs() < 1e-12, "{}", r[[0, 0, 1]]);
    assert!((r[[0, 0, 1]] + r[[0, 1, 0]]).abs() < 1e-15);
    let p2 = pt(&[1.1, 0.4], &[0.3, -0.8]);
    let rhh = curvature::hh_curvature(&d, &p2, ConnectionKind::ChernRund).unwrap();
    let m = metric(&d, &p2).unwrap();
    let lowered: f64 = (0..2).map(|s| m.g[[0, s]] * rhh[[s, 1, 0, 1]]).sum();
    assert!((lowered / m.det - 1.0).abs() < 1e-10, "{lowered} {}", m.det);
}

#[test]
fn flat_everything_vanishes() {
    let d = corpus("euclid");
    let p = pt(&[0.2, 0.7], &[3.0, 4.0]);
    let m = metric(&d, &p).unwrap();
    assert_eq!(m.g.data(), &[1.0, 0.0, 0.0, 1.0]);
    for kind in ConnectionKind::ALL {
        let c = curvature::curvature(&d, &p, kind).unwrap();
        assert!(c.rhh.max_abs() + c.rvh.max_abs() + c.rvv.max_abs() == 0.0);
        let t = spray::connection_triple(&d, &p, kind).unwrap();
        assert_eq!(t.regular_det, 1.0);
    }
    assert_eq!(volume_derivatives(&d, &p).unwrap(), [0.0; 4]);
}

#[test]
fn constant_randers_is_berwald_not_riemannian() {
    let d = corpus("randers_const");
    let p = pt(&[0.4, 1.3], &[0.7, -0.2]);
    let s = spray::spray(&d, &p).unwrap();
    assert!(s.g0.max_abs() == 0.0);
    let l = landsberg(&d, &p).unwrap();
    assert!(l.l3.max_abs() < 1e-14 && l.route_spread < 1e-14);
    assert!(cartan(&d, &p).unwrap().lower.max_abs() > 1e-3);
}

#[test]
fn randers_landsberg_routes_and_triples() {
    let d = corpus("randers_pos");
    let p = pt(&[0.9, 1.7], &[0.6, 0.5]);
    let l = landsberg(&d, &p).unwrap();
    assert!(l.l3.max_abs() > 1e-4, "{}", l.l3.max_abs());
    assert!(l.route_spread < 1e-10, "{}", l.route_spread);
    let c = cartan(&d, &p).unwrap();
    assert!(c.mean.max_diff(&c.mean_from_volume) < 1e-12);

    let g = covariant_deriv(&d, &p, ConnectionKind::Cartan, &Field::Metric, Direction::Horizontal).unwrap();
    assert!(g.max_abs() < 1e-10);
    let g = covariant_deriv(&d, &p, ConnectionKind::Cartan, &Field::Metric, Direction::Vertical).unwrap();
    assert!(g.max_abs() < 1e-10);
    let vb = covariant_deriv(&d, &p, ConnectionKind::Berwald, &Field::Metric, Direction::Vertical).unwrap();
    let twice_c = c.lower.permute(&[2, 0, 1]).scaled(2.0);
    assert!(vb.max_diff(&twice_c) < 1e-10);
    let hb = covariant_deriv(&d, &p, ConnectionKind::Berwald, &Field::Metric, Direction::Horizontal).unwrap();
    assert!(hb.max_diff(&l.l3.scaled(-2.0)) < 1e-10);

    for kind in [ConnectionKind::Cartan, ConnectionKind::ChernRund] {
        let t = torsion_projections(&d, &p, kind).unwrap();
        let lm = finsler_core::PointGeometry::new(&d, &p).unwrap().landsberg_mixed.value().unwrap();
        assert!(t.ver_vh.max_diff(&lm) < 1e-10);
    }
    let v = volume_derivatives(&d, &p).unwrap();
    assert!(v.iter().all(|r| *r < 1e-10), "{v:?}");
}

#[test]
fn euler_defects() {
    assert_eq!(euler_check(&corpus("euclid"), &pt(&[0.0, 0.0], &[3.0, 4.0])).unwrap(), (0.0, 0.0));
    let (a, b) = euler_check(&corpus("randers_const"), &pt(&[0.0, 0.0], &[1.0, 0.2])).unwrap();
    assert!(a <= 1e-12 && b <= 1e-12, "{a} {b}");
    let broken = LagrangianDef::from_expr(1, "y0^2 + y0").unwrap();
    assert_eq!(euler_check(&broken, &pt(&[0.0], &[1.0])).unwrap().0, 1.0);
    for name in ["euclid", "lorentz", "sphere", "randers_const", "randers_pos", "randers3"] {
        let d = corpus(name);
        for p in sample_points(d.dim, 50, 3, SampleBox { lo: 0.6, hi: 1.4 }) {
            let l = eval_l(&d, &p).unwrap().abs();
            let (a, b) = euler_check(&d, &p).unwrap();
            assert!(a <= 1e-10 * l && b <= 1e-10 * l.max(1.0), "{name} at {p:?}: {a} {b}");
        }
    }
}

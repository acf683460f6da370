//! Property tests of the invariants every layer must respect.

use finsler_core::expr::{Expr, Func};
use finsler_core::fd::fd_oracle;
use finsler_core::geodesic::{flip_transport, Path, StepControl};
use finsler_core::jet::lift_point;
use finsler_core::lagrangian::{eval_l, Body};
use finsler_core::spray::{nonlinear_value, spray_value};
use finsler_core::verify::run_suite;
use finsler_core::{LagrangianDef, TangentPoint};
use proptest::prelude::*;

fn corpus(name: &str) -> LagrangianDef {
    let path = format!("{}/../../corpus/{name}.fin", env!("CARGO_MANIFEST_DIR"));
    LagrangianDef::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn scaled(def: &LagrangianDef, c: f64) -> LagrangianDef {
    let mut d = def.clone();
    d.lagrangian = Expr::mul(Expr::Num(c), d.lagrangian);
    d.body = Body::General;
    d
}

// Smooth expressions in x0, x1, y0, y1 that are defined everywhere.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..2usize).prop_map(Expr::X),
        (0..2usize).prop_map(Expr::Y),
        (-1.5..1.5f64).prop_map(Expr::Num),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let two = || Expr::Num(2.0);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, Expr::call(Func::Cos, a))),
            (inner.clone(), inner.clone())
                .prop_map(move |(a, b)| Expr::div(a, Expr::add(two(), Expr::call(Func::Sin, b)))),
            inner.clone().prop_map(move |a| Expr::call(Func::Sqrt, Expr::add(Expr::Num(1.0), Expr::pow(a, two())))),
        ]
    })
}

fn vec2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2)
}

// Directions bounded away from the zero section.
fn direction(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n).prop_filter("y near zero", |y| y.iter().map(|v| v * v).sum::<f64>() > 0.05)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_partials_match_finite_differences(e in smooth_expr(), x in vec2(), y in vec2()) {
        let (xs, ys) = lift_point(&x, &y, 3, 3);
        let jet = e.eval_jet(xs[0].layout(), &xs, &ys).unwrap();
        prop_assert!(close(jet.value().unwrap(), e.eval_f64(&x, &y).unwrap(), 1e-14));
        let f = |x: &[f64], y: &[f64]| e.eval_f64(x, y).unwrap();
        for (alpha, beta) in [([1, 0], [0, 0]), ([0, 0], [0, 1]), ([1, 0], [1, 0]), ([0, 2], [1, 0]), ([0, 0], [2, 1])] {
            let j = jet.partial(&alpha, &beta).unwrap();
            let fd = fd_oracle(&f, &x, &y, &alpha, &beta, None).value;
            prop_assert!(close(j, fd, 1e-6), "{e}: ∂{alpha:?}{beta:?} jet {j} fd {fd}");
        }
    }

    #[test]
    fn lagrangian_and_spray_are_homogeneous(
        x in prop::collection::vec(-1.0..1.0f64, 3),
        y in direction(3),
        lam in 0.2..5.0f64,
    ) {
        let d = corpus("randers3");
        let p = TangentPoint::new(x.clone(), y.clone());
        let q = TangentPoint::new(x, y.iter().map(|v| lam * v).collect());
        prop_assert!(close(eval_l(&d, &q).unwrap(), lam * lam * eval_l(&d, &p).unwrap(), 1e-12));
        let (g, gl) = (spray_value(&d, &p).unwrap(), spray_value(&d, &q).unwrap());
        for (a, b) in g.data().iter().zip(gl.data()) {
            prop_assert!(close(*b, lam * lam * a, 1e-11), "G: {b} vs {}", lam * lam * a);
        }
        let (n, nl) = (nonlinear_value(&d, &p).unwrap(), nonlinear_value(&d, &q).unwrap());
        for (a, b) in n.data().iter().zip(nl.data()) {
            prop_assert!(close(*b, lam * a, 1e-11), "N: {b} vs {}", lam * a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flip_transport_is_linear(v in direction(2), w in direction(2), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let d = corpus("sphere");
        let path = Path::Geodesic { start: TangentPoint::new(vec![1.1, 0.2], vec![0.3, 0.9]), t_end: 1.5 };
        let ctrl = StepControl::default();
        let combo: Vec<f64> = v.iter().zip(&w).map(|(p, q)| a * p + b * q).collect();
        let tv = flip_transport(&d, &path, &v, 5, &ctrl).unwrap();
        let tw = flip_transport(&d, &path, &w, 5, &ctrl).unwrap();
        let tc = flip_transport(&d, &path, &combo, 5, &ctrl).unwrap();
        for k in 0..5 {
            for i in 0..2 {
                let want = a * tv.v[k][i] + b * tw.v[k][i];
                prop_assert!((tc.v[k][i] - want).abs() <= 1e-10, "{} vs {want}", tc.v[k][i]);
            }
        }
    }

    #[test]
    fn residuals_are_scale_invariant(
        x in prop::collection::vec(-0.8..0.8f64, 3),
        y in direction(3),
        c in 0.1..10.0f64,
    ) {
        let d = corpus("randers3");
        let pts = [TangentPoint::new(x, y)];
        let base = run_suite(&d, &pts, 1e-7).unwrap();
        let other = run_suite(&scaled(&d, c), &pts, 1e-7).unwrap();
        for (r, s) in base.identities.iter().zip(&other.identities) {
            prop_assert_eq!(r.id, s.id);
            prop_assert!((r.max - s.max).abs() <= 1e-10, "{}: {} vs {}", r.id, r.max, s.max);
        }
    }
}

//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that each criterion reports its
//! measured figure even when it passes.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use finsler_core::classify::{classify_space, Criterion, Thresholds, Verdict};
use finsler_core::curvature::{self, landsberg};
use finsler_core::diffeo::{cocycle_pair, transformed};
use finsler_core::expr::{Expr, Func};
use finsler_core::fd::fd_oracle;
use finsler_core::geodesic::{integrate_geodesic, parallel_transport, FnCurve, Path, StepControl};
use finsler_core::jet::{lift_point, ElemFn};
use finsler_core::lagrangian::{cartan, metric};
use finsler_core::sampling::{sample_points, SampleBox};
use finsler_core::spray::{reconstruct_connection, spray_value, torsion_of, SpraySample};
use finsler_core::tensor::Tensor;
use finsler_core::verify::{list_identities, run_suite};
use finsler_core::{ConnectionKind, Jet, LagrangianDef, PointGeometry, TangentPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> LagrangianDef {
    let path = root().join("corpus").join(format!("{name}.fin"));
    LagrangianDef::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const CORPUS: [&str; 6] = ["euclid", "lorentz", "sphere", "randers_const", "randers_pos", "randers3"];

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

// A random smooth expression in x0, x1, y0, y1 that is defined everywhere.
fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..5) {
            0 => Expr::X(0),
            1 => Expr::X(1),
            2 => Expr::Y(0),
            3 => Expr::Y(1),
            _ => Expr::Num(rng.gen_range(-1.5..1.5)),
        };
    }
    let op = rng.gen_range(0..10);
    let mut sub = || random_expr(rng, depth - 1);
    let two = || Expr::Num(2.0);
    match op {
        0 => Expr::add(sub(), sub()),
        1 => Expr::sub(sub(), sub()),
        2 | 3 => Expr::mul(sub(), sub()),
        4 => Expr::call(Func::Sin, sub()),
        5 => Expr::call(Func::Cos, sub()),
        6 => Expr::call(Func::Exp, Expr::call(Func::Sin, sub())),
        7 => Expr::div(sub(), Expr::add(two(), Expr::call(Func::Cos, sub()))),
        8 => Expr::call(Func::Log, Expr::add(two(), Expr::call(Func::Sin, sub()))),
        _ => Expr::call(Func::Sqrt, Expr::add(Expr::Num(1.0), Expr::pow(sub(), two()))),
    }
}

fn multi_indices(vars: usize, max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|m: Vec<u8>| {
                let used: usize = m.iter().map(|&v| v as usize).sum();
                (0..=(max - used) as u8).map(move |k| {
                    let mut m = m.clone();
                    m.push(k);
                    m
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let indices = multi_indices(4, 4);
    let mut worst = [0.0f64; 2];
    let mut checked = 0;
    for _ in 0..200 {
        let e = random_expr(&mut rng, 4);
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (xs, ys) = lift_point(&x, &y, 4, 4);
        let jet = e.eval_jet(xs[0].layout(), &xs, &ys).map_err(|err| format!("{e}: {err}"))?;
        let f = |x: &[f64], y: &[f64]| e.eval_f64(x, y).unwrap();
        for m in &indices {
            let total: usize = m.iter().map(|&v| v as usize).sum();
            if total == 0 {
                continue;
            }
            let j = jet.partial(&m[..2], &m[2..]).map_err(|err| err.to_string())?;
            let fd = fd_oracle(&f, &x, &y, &m[..2], &m[2..], None).value;
            let err = rel_err(j, fd);
            let slot = usize::from(total == 4);
            worst[slot] = worst[slot].max(err);
            checked += 1;
            if err > [1e-6, 1e-4][slot] {
                return Err(format!("{e} at {x:?},{y:?}: ∂{m:?} jet {j} vs fd {fd}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        secs < 10.0,
        format!("{checked} partials of 200 expressions, worst rel {:.1e} (≤3) {:.1e} (4), {secs:.1}s", worst[0], worst[1]),
    )
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 3;
    let (mut c_max, mut b_max, mut g_max) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        // A = B Bᵀ + I, φ = exp(c · x).
        let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-0.7..0.7)).collect();
        let a = Tensor::fn2(n, |i, j| (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>() + f64::from(i == j));
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let quad: Vec<String> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| format!("{:?}*y{i}*y{j}", a[[i, j]]))
            .collect();
        let phi: Vec<String> = (0..n).map(|i| format!("{:?}*x{i}", c[i])).collect();
        let src = format!("0.5*exp({})*({})", phi.join(" + "), quad.join(" + "));
        let def = LagrangianDef::from_expr(n, &src).map_err(|e| e.to_string())?;
        let ainv = finsler_core::linalg::inverse(&a).ok_or("singular A")?;
        for p in sample_points(n, 20, rng.gen(), SampleBox::new(-1.0, 1.0).unwrap()) {
            let geo = PointGeometry::new(&def, &p).map_err(|e| e.to_string())?;
            c_max = c_max.max(geo.cartan.value().unwrap().max_abs());
            b_max = b_max.max(geo.berwald_curvature.value().unwrap().max_abs());
            let gam = geo.chern.value().unwrap();
            // Γ^i_jk = ½ (δ^i_k c_j + δ^i_j c_k − A^il A_jk c_l).
            let d = |i: usize, j: usize| f64::from(i == j);
            let oracle = Tensor::fn3(n, |i, j, k| {
                let s: f64 = (0..n).map(|l| ainv[[i, l]] * c[l]).sum();
                0.5 * (d(i, k) * c[j] + d(i, j) * c[k] - s * a[[j, k]])
            });
            g_max = g_max.max(gam.max_diff(&oracle));
        }
    }
    ensure(
        c_max <= 1e-10 && b_max <= 1e-8 && g_max <= 1e-8,
        format!("max|C| {c_max:.1e}, max|𝒢^i_jkl| {b_max:.1e}, Γ vs Christoffel {g_max:.1e}"),
    )
}

fn criterion_3() -> Check {
    let d = corpus("sphere");
    let mut worst = 0.0f64;
    for p in sample_points(2, 20, 3, SampleBox::new(0.3, PI - 0.3).unwrap()) {
        let rhh = curvature::hh_curvature(&d, &p, ConnectionKind::ChernRund).map_err(|e| e.to_string())?;
        let m = metric(&d, &p).map_err(|e| e.to_string())?;
        let lowered: f64 = (0..2).map(|s| m.g[[0, s]] * rhh[[s, 1, 0, 1]]).sum();
        worst = worst.max((lowered / m.det - 1.0).abs());
    }
    let p = TangentPoint::new(vec![PI / 3.0, 0.0], vec![0.0, 1.0]);
    let r = curvature::nonlinear_curvature(&d, &p).map_err(|e| e.to_string())?;
    let r001 = r[[0, 0, 1]].abs();
    ensure(
        worst <= 1e-6 && (r001 - 0.75).abs() <= 1e-8,
        format!("|R_0101/det g − 1| ≤ {worst:.1e}, |R^0_01| = {r001:.12}"),
    )
}

fn criterion_4() -> Check {
    let count = list_identities().len();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for name in CORPUS {
        let def = corpus(name);
        let rep = run_suite(&def, &sample_points(def.dim, 50, 7, SampleBox::DEFAULT), 1e-7).map_err(|e| e.to_string())?;
        if !rep.point_errors.is_empty() {
            notes.push(format!("{name}: {} unusable points", rep.point_errors.len()));
        }
        for r in rep.failed() {
            notes.push(format!("{name}/{} {:.1e}", r.id, r.max));
        }
        worst = worst.max(rep.identities.iter().map(|r| r.max).fold(0.0, f64::max));
    }
    if notes.is_empty() && count >= 40 {
        Ok(format!("{count} identities on {} spaces at 50 points, worst residual {worst:.1e}", CORPUS.len()))
    } else {
        Err(format!("{count} identities; {}", notes.join(", ")))
    }
}

fn criterion_5() -> Check {
    let mut spread = 0.0f64;
    for name in CORPUS {
        let def = corpus(name);
        for p in sample_points(def.dim, 20, 5, SampleBox::DEFAULT) {
            spread = spread.max(landsberg(&def, &p).map_err(|e| format!("{name}: {e}"))?.route_spread);
        }
    }
    let def = corpus("randers_const");
    let (mut l_max, mut c_max) = (0.0f64, 0.0f64);
    for p in sample_points(2, 20, 5, SampleBox::DEFAULT) {
        l_max = l_max.max(landsberg(&def, &p).unwrap().l3.max_abs());
        c_max = c_max.max(cartan(&def, &p).unwrap().lower.max_abs());
    }
    ensure(
        spread <= 1e-8 && l_max <= 1e-9 && c_max >= 1e-3,
        format!("route spread {spread:.1e}; const-Randers max|L| {l_max:.1e}, max|C| {c_max:.2e}"),
    )
}

fn criterion_6() -> Check {
    let th = Thresholds::default();
    let rc = classify_space(&corpus("randers_const"), 50, 1, SampleBox::DEFAULT, th).map_err(|e| e.to_string())?;
    let minkowski = rc.verdict(Criterion::LocallyMinkowski) == Verdict::Holds;
    let riem = rc.get(Criterion::PseudoRiemannian);
    let non_riem = riem.verdict == Verdict::Fails && riem.witness.is_some();

    let def = corpus("randers_pos");
    let rp = classify_space(&def, 50, 1, SampleBox::DEFAULT, th).map_err(|e| e.to_string())?;
    let ber = rp.get(Criterion::Berwald);
    let (_, w) = ber.witness.clone().ok_or("no Berwald witness")?;
    // Third y-derivatives of the spray by central differences.
    let jet = PointGeometry::new(&def, &w).unwrap().berwald_curvature.value().unwrap();
    let mut fd_dev = 0.0f64;
    for i in 0..2 {
        let f = |x: &[f64], y: &[f64]| spray_value(&def, &TangentPoint::new(x.to_vec(), y.to_vec())).unwrap()[[i]];
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut beta = [0u8; 2];
                    for m in [j, k, l] {
                        beta[m] += 1;
                    }
                    let fd = fd_oracle(&f, &w.x, &w.y, &[0, 0], &beta, None).value;
                    fd_dev = fd_dev.max(rel_err(jet[[i, j, k, l]], fd));
                }
            }
        }
    }
    ensure(
        minkowski && non_riem && ber.verdict == Verdict::Fails && ber.max > 1e-3 && fd_dev < 1e-5,
        format!(
            "const-Randers minkowski={minkowski} non-riemannian={non_riem}; randers-pos Berwald residual {:.2e}, FD deviation {fd_dev:.1e}",
            ber.max
        ),
    )
}

fn criterion_7() -> Check {
    // N^i_k = A^i_kj(x) y^j + B^i_k(x) |y|, 1-homogeneous and not the Berwald connection of anything.
    let mut worst = 0.0f64;
    for p in sample_points(2, 20, 8, SampleBox::DEFAULT) {
        let (xs, ys) = lift_point(&p.x, &p.y, 0, 3);
        let norm = (&(&ys[0] * &ys[0]) + &(&ys[1] * &ys[1])).powf(0.5).unwrap();
        let sx = |k: usize, s: f64| xs[k].scale(s).apply(ElemFn::Sin).unwrap();
        let nj = Tensor::fn2(2, |i, k| {
            let mut t = norm.mul_jet(&sx(i, 0.3 + 0.2 * k as f64));
            for j in 0..2 {
                let coeff = sx((i + j + k) % 2, 0.5 + 0.1 * (i + 2 * j + 3 * k) as f64);
                t.add_assign(&coeff.mul_jet(&ys[j]));
            }
            t
        });
        let half_g: Vec<Jet> = (0..2)
            .map(|i| {
                let mut s = nj[[i, 0]].mul_jet(&ys[0]);
                s.add_assign(&nj[[i, 1]].mul_jet(&ys[1]));
                s.scale(0.5)
            })
            .collect();
        let g0 = Tensor::fn1(2, |i| half_g[i].val());
        let g1 = Tensor::fn2(2, |i, k| half_g[i].d_y(k).val());
        let sp = SpraySample { g0, g1, g2: Tensor::zeros(2, 3), g3: Tensor::zeros(2, 4) };
        let tau = torsion_of(&nj).map(Jet::val);
        let rec = reconstruct_connection(&p, &sp, &tau).map_err(|e| e.to_string())?;
        worst = worst.max(rec.max_diff(&nj.map(Jet::val)));
    }
    ensure(worst <= 1e-10, format!("reconstruction error {worst:.1e} at 20 points"))
}

fn criterion_8() -> Check {
    let ctrl = StepControl::default();
    let mut drift = 0.0f64;
    for name in CORPUS {
        let def = corpus(name);
        for p in sample_points(def.dim, 4, 11, SampleBox::new(0.6, 1.4).unwrap()) {
            let p = TangentPoint::new(p.x, p.y.iter().map(|v| 0.3 * v).collect());
            let tr = integrate_geodesic(&def, &p, 10.0, 51, &ctrl).map_err(|e| format!("{name}: {e}"))?;
            drift = drift.max(tr.relative_drift());
        }
    }
    let e = integrate_geodesic(&corpus("euclid"), &TangentPoint::new(vec![0.0, 0.0], vec![1.0, 2.0]), 3.0, 31, &ctrl)
        .map_err(|e| e.to_string())?;
    let line = e.t.iter().zip(&e.x).map(|(t, x)| (x[0] - t).abs().max((x[1] - 2.0 * t).abs())).fold(0.0, f64::max);
    let s = integrate_geodesic(&corpus("sphere"), &TangentPoint::new(vec![PI / 2.0, 0.0], vec![0.0, 1.0]), PI, 101, &ctrl)
        .map_err(|e| e.to_string())?;
    let equator = s.x.iter().map(|x| (x[0] - PI / 2.0).abs()).fold(0.0, f64::max);
    let th = PI / 3.0;
    let curve = FnCurve::new(2, (0.0, 2.0 * PI), move |t| vec![th, t], |_| vec![0.0, 1.0]);
    let tr = parallel_transport(&corpus("sphere"), &Path::Curve(&curve), &[1.0, 0.0], 2, &ctrl)
        .map_err(|e| e.to_string())?;
    let (a0, b0) = (tr.v[0][0], tr.v[0][1] * th.sin());
    let (a1, b1) = (tr.v[1][0], tr.v[1][1] * th.sin());
    let angle = (a0 * b1 - b0 * a1).atan2(a0 * a1 + b0 * b1).abs();
    ensure(
        drift <= 1e-8 && line <= 1e-12 && equator <= 1e-9 && (angle - PI).abs() <= 1e-6,
        format!("drift {drift:.1e}, line {line:.1e}, equator {equator:.1e}, holonomy |angle − π| {:.1e}", (angle - PI).abs()),
    )
}

fn criterion_9() -> Check {
    let mut worst = 0.0f64;
    for name in ["sphere", "randers_pos", "randers3", "lorentz"] {
        let def = corpus(name);
        let tdef = transformed(&def);
        for p in sample_points(def.dim, 20, 4, SampleBox::DEFAULT) {
            let (computed, pred) = cocycle_pair(&def, &tdef, &p).map_err(|e| format!("{name}: {e}"))?;
            let scale = |t: &Tensor<f64>| t.max_abs().max(1.0);
            worst = worst
                .max(computed.g0.max_diff(&pred.spray) / scale(&pred.spray))
                .max(computed.g1.max_diff(&pred.nonlinear) / scale(&pred.nonlinear));
        }
    }
    ensure(worst <= 1e-8, format!("spray and N cocycles, worst relative defect {worst:.1e}"))
}

fn criterion_10() -> Check {
    let bin = env!("CARGO_BIN_EXE_finsler");
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: [(&str, &[&str], i32); 6] = [
        ("tensors_euclid.json", &["tensors", "--def", "corpus/euclid.fin", "--x", "0,0", "--y", "3,4"], 0),
        (
            "verify_broken.json",
            &["verify", "--def", "corpus/broken_inhomogeneous.fin", "--samples", "10", "--seed", "7"],
            1,
        ),
        ("classify_euclid.json", &["classify", "--def", "corpus/euclid.fin"], 0),
        (
            "classify_randers_const.json",
            &["classify", "--def", "corpus/randers_const.fin", "--samples", "100", "--seed", "1"],
            0,
        ),
        (
            "geodesic_euclid.csv",
            &["geodesic", "--def", "corpus/euclid.fin", "--x", "0,0", "--y", "1,2", "--t", "3", "--samples", "31"],
            0,
        ),
        (
            "verify_sphere.json",
            &["verify", "--def", "corpus/sphere.fin", "--samples", "50", "--seed", "7", "--tol", "1e-7"],
            0,
        ),
    ];
    for (file, args, code) in cases {
        let out = Command::new(bin).args(args).current_dir(root()).output().map_err(|e| e.to_string())?;
        if out.status.code() != Some(code) {
            return Err(format!("{file}: exit {:?}, expected {code}", out.status.code()));
        }
        let want = std::fs::read(golden.join(file)).map_err(|e| format!("{file}: {e}"))?;
        if out.stdout != want {
            return Err(format!("{file}: output differs from golden file"));
        }
    }
    let codes: Vec<i32> = [
        &["verify", "--def", "corpus/sphere.fin", "--tol", "-1"][..],
        &["tensors", "--def", "corpus/malformed.fin", "--x", "0,0", "--y", "1,1"],
        &["tensors", "--def", "corpus/sphere.fin", "--x", "0,0", "--y", "1,1"],
    ]
    .iter()
    .map(|args| Command::new(bin).args(*args).current_dir(root()).output().unwrap().status.code().unwrap_or(-1))
    .collect();
    ensure(codes == [2, 2, 3], format!("{} golden files byte-stable, exit codes 0/1/2/3 as specified", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("jet derivatives match finite differences", criterion_1),
        ("Riemannian reduction", criterion_2),
        ("sphere curvature", criterion_3),
        ("identity suite on the corpus", criterion_4),
        ("Landsberg routes agree", criterion_5),
        ("classifier witnesses", criterion_6),
        ("connection from spray and torsion", criterion_7),
        ("geodesic conservation and symmetry", criterion_8),
        ("coordinate covariance", criterion_9),
        ("CLI contract", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

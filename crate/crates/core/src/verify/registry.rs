//! The identity catalogue.
//!
//! Every residual is assembled from value tensors of the individual terms and
//! normalized by [`defect`]. Mixed tensors keep the upper index first; lowered
//! curvatures use `R_ijkl = g_is R^s_jkl`.

use crate::curvature::landsberg_routes;
use crate::diffeo;
use crate::geometry::ConnectionKind::{
    self, Berwald as BER, Cartan as CAR, ChernRund as CHR, Hashiguchi as HAS, MeanBerwald as MBE,
    MeanChernRund as MCH,
};
use crate::geometry::{regularity_determinant, Slot};
use crate::jet::Jet;
use crate::spray::{volume_form, SpraySample};
use crate::tensor::{sum, Tensor};

use super::context::{defect, Ctx, Res};
use super::{IdentitySpec, Residual};

const D: Slot = Slot::Down;
const U: Slot = Slot::Up;

const ALL: &[ConnectionKind] = &ConnectionKind::ALL;
const NOTABLE: &[ConnectionKind] = &ConnectionKind::NOTABLE;
const MEAN: &[ConnectionKind] = &[MBE, MCH];
const HORIZONTAL_CHERN: &[ConnectionKind] = &[CAR, CHR];

fn t2(n: usize, f: impl FnMut(usize, usize) -> f64) -> Tensor<f64> {
    Tensor::fn2(n, f)
}
fn t3(n: usize, f: impl FnMut(usize, usize, usize) -> f64) -> Tensor<f64> {
    Tensor::fn3(n, f)
}
fn t4(n: usize, f: impl FnMut(usize, usize, usize, usize) -> f64) -> Tensor<f64> {
    Tensor::fn4(n, f)
}
fn t5(n: usize, f: impl FnMut(usize, usize, usize, usize, usize) -> f64) -> Tensor<f64> {
    Tensor::fn5(n, f)
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The three cyclic shifts of `(i, j, k)` of a tensor indexed `[l, s, i, j, k]`.
fn cyclic(n: usize, f: impl Fn(usize, usize, usize, usize, usize) -> f64) -> [Tensor<f64>; 3] {
    [
        t5(n, &f),
        t5(n, |l, s, i, j, k| f(l, s, j, k, i)),
        t5(n, |l, s, i, j, k| f(l, s, k, i, j)),
    ]
}

fn worst(parts: &[f64]) -> f64 {
    parts.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(*v) })
}

fn dl(c: &Ctx) -> Result<Vec<f64>, crate::GeometryError> {
    (0..c.n).map(|k| Ok(c.geo.l.d_y(k).value()?)).collect()
}

fn lowered_y(c: &Ctx) -> Vec<f64> {
    (0..c.n).map(|m| sum(c.n, |k| c.v.g[[m, k]] * c.y[k])).collect()
}

// Homogeneity and the Lagrangian.

fn euler_lagrangian(c: &Ctx) -> Res {
    let dl = dl(c)?;
    let yl = sum(c.n, |k| c.y[k] * dl[k]);
    Ok(defect(&[c.scalar(yl), c.scalar(-2.0 * c.v.l)]))
}

fn metric_homogeneity(c: &Ctx) -> Res {
    let dg = c.dy(&c.geo.g)?;
    Ok(defect(&[c.radial(&dg)]))
}

fn lagrangian_from_metric(c: &Ctx) -> Res {
    let n = c.n;
    let q = sum(n, |i| sum(n, |j| c.v.g[[i, j]] * c.y[i] * c.y[j]));
    Ok(defect(&[c.scalar(0.5 * q), c.scalar(-c.v.l)]))
}

fn metric_contracted(c: &Ctx) -> Res {
    let dl = dl(c)?;
    let gy = Tensor::fn1(c.n, |j| sum(c.n, |i| c.v.g[[i, j]] * c.y[i]));
    Ok(defect(&[gy, Tensor::fn1(c.n, |j| -dl[j])]))
}

fn cartan_transverse(c: &Ctx) -> Res {
    let n = c.n;
    let cy = t2(n, |i, j| sum(n, |k| c.v.c[[i, j, k]] * c.y[k]));
    Ok(defect(&[cy]))
}

fn spray_euler_chain(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let a = defect(&[Tensor::fn1(n, |i| sum(n, |k| v.nl[[i, k]] * c.y[k])), v.sp.scaled(-2.0)]);
    let b = defect(&[t2(n, |i, j| sum(n, |k| v.b2[[i, j, k]] * c.y[k])), v.nl.scaled(-1.0)]);
    let d = defect(&[t3(n, |i, j, k| sum(n, |l| v.b3[[i, j, k, l]] * c.y[l]))]);
    Ok(worst(&[a, b, d]))
}

fn berwald_curvature_symmetric(c: &Ctx) -> Res {
    let (n, b) = (c.n, &c.v.b3);
    let a = defect(&[b.clone(), t4(n, |i, j, k, l| -b[[i, k, j, l]])]);
    let d = defect(&[b.clone(), t4(n, |i, j, k, l| -b[[i, j, l, k]])]);
    Ok(worst(&[a, d]))
}

fn horizontal_invariance(c: &Ctx) -> Res {
    let n = c.n;
    let dl = dl(c)?;
    let dx: Vec<f64> = (0..n).map(|k| c.geo.l.d_x(k).value()).collect::<Result<_, _>>()?;
    let nd = Tensor::fn1(n, |k| -sum(n, |a| c.v.nl[[a, k]] * dl[a]));
    Ok(defect(&[Tensor::from_vec(n, 1, dx), nd]))
}

// Spray and metric.

fn lxy(c: &Ctx) -> Result<Tensor<f64>, crate::GeometryError> {
    Ok(Tensor::fn2(c.n, |k, s| c.geo.l.d_x(k).d_y(s)).value()?)
}

fn spray_two_forms(c: &Ctx) -> Res {
    let n = c.n;
    let lxy = lxy(c)?;
    let lx: Vec<f64> = (0..n).map(|s| c.geo.l.d_x(s).value()).collect::<Result<_, _>>()?;
    let rhs = Tensor::fn1(n, |i| -sum(n, |s| c.v.gi[[i, s]] * (sum(n, |k| lxy[[k, s]] * c.y[k]) - lx[s])));
    Ok(defect(&[c.v.sp.scaled(2.0), rhs]))
}

fn spray_metric_relation(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let lxy = lxy(c)?;
    let lxyy = Tensor::fn3(n, |m, i, j| c.geo.l.d_x(m).d_y(i).d_y(j)).value()?;
    Ok(defect(&[
        t2(n, |i, j| 4.0 * sum(n, |s| v.c[[s, i, j]] * v.sp[[s]])),
        t2(n, |i, j| 2.0 * sum(n, |s| v.g[[s, i]] * v.nl[[s, j]])),
        t2(n, |i, j| -sum(n, |m| c.y[m] * lxyy[[m, i, j]])),
        t2(n, |i, j| -lxy[[j, i]]),
        t2(n, |i, j| lxy[[i, j]]),
    ]))
}

fn metric_transport(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let dgx = c.geo.g.grad_x().value()?;
    Ok(defect(&[
        c.radial(&dgx),
        t2(n, |i, j| -4.0 * sum(n, |s| v.c[[s, i, j]] * v.sp[[s]])),
        t2(n, |i, j| -sum(n, |s| v.g[[s, i]] * v.nl[[s, j]])),
        t2(n, |i, j| -sum(n, |s| v.g[[s, j]] * v.nl[[s, i]])),
    ]))
}

fn metric_x_derivative(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let dgx = c.geo.g.grad_x().value()?;
    let dcx = c.radial(&c.geo.cartan.grad_x().value()?);
    let c4 = c.cartan4().value()?;
    Ok(defect(&[
        t3(n, |i, j, k| dgx[[k, i, j]]),
        dcx.scaled(2.0),
        t3(n, |i, j, k| -4.0 * sum(n, |s| c4[[s, i, j, k]] * v.sp[[s]])),
        t3(n, |i, j, k| -4.0 * sum(n, |s| v.c[[s, i, j]] * v.nl[[s, k]])),
        t3(n, |i, j, k| -2.0 * sum(n, |s| v.c[[s, i, k]] * v.nl[[s, j]])),
        t3(n, |i, j, k| -sum(n, |s| v.g[[s, i]] * v.b2[[s, j, k]])),
        t3(n, |i, j, k| -2.0 * sum(n, |s| v.c[[s, j, k]] * v.nl[[s, i]])),
        t3(n, |i, j, k| -sum(n, |s| v.g[[s, j]] * v.b2[[s, i, k]])),
    ]))
}

fn berwald_curvature_metric(c: &Ctx) -> Res {
    let n = c.n;
    let gy = lowered_y(c);
    let hg = c.ch(&c.geo.g, &[D, D], BER)?;
    Ok(defect(&[t3(n, |i, j, k| sum(n, |l| c.v.b3[[l, i, j, k]] * gy[l])), hg.scaled(-1.0)]))
}

fn metric_horizontal_cartan(c: &Ctx) -> Res {
    let hg = c.ch(&c.geo.g, &[D, D], BER)?;
    let hc = c.ch(&c.geo.cartan, &[D, D, D], BER)?;
    Ok(defect(&[hg, c.radial(&hc).scaled(2.0)]))
}

// Landsberg tensor.

fn landsberg_route_agreement(c: &Ctx) -> Res {
    let r = landsberg_routes(&c.geo)?;
    let (a, b, d) = (&r.from_berwald_curvature, &r.from_metric_derivative, &r.from_difference);
    Ok(worst(&[
        defect(&[a.clone(), b.scaled(-1.0)]),
        defect(&[a.clone(), d.scaled(-1.0)]),
        defect(&[b.clone(), d.scaled(-1.0)]),
    ]))
}

fn landsberg_symmetric_transverse(c: &Ctx) -> Res {
    let (n, l) = (c.n, &c.v.ls);
    Ok(worst(&[
        defect(&[l.clone(), t3(n, |i, j, k| -l[[j, i, k]])]),
        defect(&[l.clone(), t3(n, |i, j, k| -l[[i, k, j]])]),
        defect(&[t2(n, |i, j| sum(n, |k| l[[i, j, k]] * c.y[k]))]),
    ]))
}

fn regularity(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let h = &c.kind(kind)?.h0;
    Ok(defect(&[t2(n, |l, k| sum(n, |b| h[[l, b, k]] * c.y[b])), c.v.nl.scaled(-1.0)]))
}

fn chern_vertical_contraction(c: &Ctx) -> Res {
    let n = c.n;
    let dg = c.dy(&c.geo.chern)?;
    Ok(defect(&[t3(n, |l, i, k| sum(n, |j| c.y[j] * dg[[i, l, j, k]])), c.v.lm.scaled(-1.0)]))
}

fn landsberg_from_cartan(c: &Ctx) -> Res {
    let hc = c.ch(&c.geo.cartan, &[D, D, D], CAR)?;
    Ok(defect(&[c.v.ls.clone(), c.radial(&hc).scaled(-1.0)]))
}

fn mean_landsberg_from_cartan(c: &Ctx) -> Res {
    let hi = c.ch(&c.geo.mean_cartan, &[D], CAR)?;
    Ok(defect(&[c.v.j.clone(), c.radial(&hi).scaled(-1.0)]))
}

fn mean_cartan_volume(c: &Ctx) -> Res {
    let vol = c.geo.volume.value()?;
    let dv = Tensor::fn1(c.n, |i| c.geo.volume.d_y(i)).value()?;
    Ok(defect(&[c.v.i.clone(), dv.scaled(-1.0 / vol)]))
}

// Metric-derivative identities of Berwald spaces.

struct CartanDerivs {
    /// `∇^{HB}_a C_bcd`.
    hb3: Tensor<f64>,
    hb3_jets: Tensor<Jet>,
    /// `y^m ∇^{HB}_m C_ijkl`.
    rad4: Tensor<f64>,
    /// `g_is 𝒢^s_jkl`.
    lb3: Tensor<f64>,
    /// `∂_{y^a} L_bcd`.
    dl: Tensor<f64>,
}

fn cartan_derivs(c: &Ctx) -> Result<CartanDerivs, crate::GeometryError> {
    let hb3_jets = c.cov_h(&c.geo.cartan, &[D, D, D], BER)?;
    let hb4 = c.ch(&c.cartan4(), &[D, D, D, D], BER)?;
    Ok(CartanDerivs {
        hb3: hb3_jets.value()?,
        hb3_jets,
        rad4: c.radial(&hb4),
        lb3: c.lower(&c.v.b3),
        dl: c.dy(&c.geo.landsberg)?,
    })
}

fn berwald_curvature_cartan(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let h = &d.hb3;
    Ok(defect(&[
        d.lb3.clone(),
        d.rad4.scaled(-1.0),
        t4(n, |i, j, k, l| h[[i, j, k, l]]),
        t4(n, |i, j, k, l| -h[[j, i, k, l]]),
        t4(n, |i, j, k, l| -h[[k, j, i, l]]),
        t4(n, |i, j, k, l| -h[[l, j, k, i]]),
    ]))
}

fn landsberg_vertical_derivative(c: &Ctx) -> Res {
    let d = cartan_derivs(c)?;
    Ok(defect(&[d.dl.clone(), d.hb3.scaled(-1.0), d.rad4.scaled(-1.0)]))
}

fn berwald_curvature_radial_cartan(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let zero = c.geo.zero();
    let w = Tensor::fn3(n, |j, k, l| {
        let mut acc = zero.clone();
        for m in 0..n {
            acc.add_mul(1.0, &c.geo.y[m], &d.hb3_jets[[m, j, k, l]]);
        }
        acc
    });
    let dw = c.dy(&w)?;
    let h = &d.hb3;
    Ok(defect(&[
        d.lb3.clone(),
        dw.scaled(-1.0),
        t4(n, |i, j, k, l| 2.0 * h[[i, j, k, l]]),
        t4(n, |i, j, k, l| -h[[j, i, k, l]]),
        t4(n, |i, j, k, l| -h[[k, j, i, l]]),
        t4(n, |i, j, k, l| -h[[l, j, k, i]]),
    ]))
}

fn cartan_horizontal_from_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let zero = c.geo.zero();
    let gy: Vec<Jet> = (0..n)
        .map(|s| {
            let mut acc = zero.clone();
            for m in 0..n {
                acc.add_mul(1.0, &c.geo.y[m], &c.geo.g[[m, s]]);
            }
            acc
        })
        .collect();
    let w = Tensor::fn3(n, |i, j, k| {
        let mut acc = zero.clone();
        for s in 0..n {
            acc.add_mul(1.0, &gy[s], &c.geo.berwald_curvature[[s, i, j, k]]);
        }
        acc
    });
    let dw = c.dy(&w)?;
    let (h, g) = (&d.hb3, &d.lb3);
    Ok(defect(&[
        t4(n, |i, j, k, l| 2.0 * h[[l, i, j, k]]),
        t4(n, |i, j, k, l| -dw[[l, i, j, k]]),
        t4(n, |i, j, k, l| -g[[i, j, k, l]]),
        t4(n, |i, j, k, l| -g[[j, i, k, l]]),
        t4(n, |i, j, k, l| -g[[k, j, i, l]]),
        t4(n, |i, j, k, l| g[[l, j, k, i]]),
    ]))
}

fn berwald_curvature_landsberg(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let dl = &d.dl;
    Ok(defect(&[
        d.lb3.clone(),
        t4(n, |i, j, k, l| dl[[i, j, k, l]]),
        t4(n, |i, j, k, l| -dl[[j, i, k, l]]),
        t4(n, |i, j, k, l| -dl[[k, j, i, l]]),
        t4(n, |i, j, k, l| -dl[[l, j, k, i]]),
        d.rad4.clone(),
    ]))
}

fn chern_trace(c: &Ctx) -> Res {
    let n = c.n;
    let vol = c.geo.volume.value()?;
    let dv = Tensor::fn1(n, |i| c.geo.delta(&c.geo.volume, i)).value()?;
    Ok(defect(&[Tensor::fn1(n, |i| sum(n, |l| c.v.gam[[l, l, i]])), dv.scaled(-1.0 / vol)]))
}

fn berwald_trace(c: &Ctx) -> Res {
    let n = c.n;
    let vol = c.geo.volume.value()?;
    let dv = Tensor::fn1(n, |i| c.geo.delta(&c.geo.volume, i)).value()?;
    Ok(defect(&[
        Tensor::fn1(n, |i| sum(n, |l| c.v.b2[[l, l, i]])),
        dv.scaled(-1.0 / vol),
        c.v.j.scaled(-1.0),
    ]))
}

// Volume form.

fn volume_terms(c: &Ctx, kind: ConnectionKind, horizontal: bool, factor: Option<&Tensor<f64>>) -> Res {
    let n = c.n;
    let mu = volume_form(&c.geo);
    let slots = vec![D; n];
    let d = if horizontal { c.ch(&mu, &slots, kind)? } else { c.cv(&mu, &slots, kind)? };
    let mut terms = vec![d];
    if let Some(w) = factor {
        let mu0 = mu.value()?;
        terms.push(Tensor::from_fn(n, n + 1, |idx| w[[idx[0]]] * mu0.get(&idx[1..])));
    }
    // Residuals relative to the density itself.
    let scale = c.geo.volume.value()?.abs();
    let terms: Vec<Tensor<f64>> = terms.iter().map(|t| t.scaled(1.0 / scale)).collect();
    Ok(defect(&terms))
}

fn volume_cartan_horizontal(c: &Ctx) -> Res {
    volume_terms(c, CAR, true, None)
}

fn volume_cartan_vertical(c: &Ctx) -> Res {
    volume_terms(c, CAR, false, None)
}

fn volume_berwald_horizontal(c: &Ctx) -> Res {
    volume_terms(c, BER, true, Some(&c.v.j))
}

fn volume_berwald_vertical(c: &Ctx) -> Res {
    volume_terms(c, BER, false, Some(&c.v.i.scaled(-1.0)))
}

fn volume_mean_vertical(c: &Ctx, kind: ConnectionKind) -> Res {
    volume_terms(c, kind, false, None)
}

// Non-linear connection curvature.

fn nonlinear_bianchi_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let d = c.ch(&c.geo.curvature, &[U, D, D], BER)?;
    Ok(defect(&[
        t4(n, |a, i, j, k| d[[i, a, j, k]]),
        t4(n, |a, i, j, k| d[[j, a, k, i]]),
        t4(n, |a, i, j, k| d[[k, a, i, j]]),
    ]))
}

fn nonlinear_bianchi_chern(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let d = c.ch(&c.geo.curvature, &[U, D, D], CHR)?;
    let p = |a: usize, i: usize, j: usize, k: usize| sum(n, |l| v.r[[l, j, k]] * v.lm[[a, l, i]]);
    Ok(defect(&[
        t4(n, |a, i, j, k| d[[i, a, j, k]]),
        t4(n, |a, i, j, k| d[[j, a, k, i]]),
        t4(n, |a, i, j, k| d[[k, a, i, j]]),
        t4(n, &p),
        t4(n, |a, i, j, k| p(a, j, k, i)),
        t4(n, |a, i, j, k| p(a, k, i, j)),
    ]))
}

fn nonlinear_first_bianchi(c: &Ctx) -> Res {
    let n = c.n;
    let d = c.dy(&c.geo.curvature)?;
    Ok(defect(&[
        t4(n, |l, i, j, k| d[[i, l, j, k]]),
        t4(n, |l, i, j, k| d[[j, l, k, i]]),
        t4(n, |l, i, j, k| d[[k, l, i, j]]),
    ]))
}

fn hh_radial(c: &Ctx, kind: ConnectionKind) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(kind)?;
    Ok(defect(&[
        t3(n, |i, k, l| sum(n, |j| kd.hh0[[i, j, k, l]] * c.y[j])),
        v.r.scaled(-1.0),
        t3(n, |i, k, l| -sum(n, |m| sum(n, |j| kd.v0[[i, j, m]] * c.y[j]) * v.r[[m, k, l]])),
    ]))
}

fn berwald_hh_from_curvature(c: &Ctx) -> Res {
    let n = c.n;
    let d = c.dy(&c.geo.curvature)?;
    Ok(defect(&[t4(n, |i, j, k, l| d[[j, i, k, l]]), c.kind(BER)?.hh0.scaled(-1.0)]))
}

fn landsberg_quadratic(c: &Ctx) -> Tensor<f64> {
    let (n, v) = (c.n, &c.v);
    t4(n, |i, j, k, l| {
        sum(n, |m| {
            sum(n, |q| (v.ls[[i, k, m]] * v.ls[[j, l, q]] - v.ls[[i, l, m]] * v.ls[[j, k, q]]) * v.gi[[m, q]])
        })
    })
}

fn berwald_chern_hh(c: &Ctx) -> Res {
    let n = c.n;
    let hcl = c.ch(&c.geo.landsberg_mixed, &[U, D, D], CAR)?;
    let q = c.raise(&landsberg_quadratic(c));
    Ok(defect(&[
        c.kind(BER)?.hh0.clone(),
        c.kind(CHR)?.hh0.scaled(-1.0),
        t4(n, |i, j, k, l| -hcl[[k, i, j, l]]),
        t4(n, |i, j, k, l| hcl[[l, i, j, k]]),
        q.scaled(-1.0),
    ]))
}

fn berwald_chern_hh_lowered(c: &Ctx) -> Res {
    let n = c.n;
    let hcl = c.ch(&c.geo.landsberg, &[D, D, D], CAR)?;
    Ok(defect(&[
        c.lower(&c.kind(BER)?.hh0),
        c.lower(&c.kind(CHR)?.hh0).scaled(-1.0),
        t4(n, |i, j, k, l| -hcl[[k, i, j, l]]),
        t4(n, |i, j, k, l| hcl[[l, i, j, k]]),
        landsberg_quadratic(c).scaled(-1.0),
    ]))
}

fn cartan_chern_hh(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    Ok(defect(&[
        c.kind(CAR)?.hh0.clone(),
        c.kind(CHR)?.hh0.scaled(-1.0),
        t4(n, |i, j, k, l| -sum(n, |m| v.r[[m, k, l]] * v.cm[[i, j, m]])),
    ]))
}

fn first_bianchi(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let r = &c.kind(kind)?.hh0;
    Ok(defect(&[
        r.clone(),
        t4(n, |i, j, k, l| r[[i, k, l, j]]),
        t4(n, |i, j, k, l| r[[i, l, j, k]]),
    ]))
}

fn first_bianchi_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let r = &c.kind(CAR)?.hh0;
    let rc = |i: usize, j: usize, k: usize, l: usize| sum(n, |m| v.r[[m, j, k]] * v.cm[[i, l, m]]);
    Ok(defect(&[
        r.clone(),
        t4(n, |i, j, k, l| r[[i, k, l, j]]),
        t4(n, |i, j, k, l| r[[i, l, j, k]]),
        t4(n, |i, j, k, l| -rc(i, j, k, l)),
        t4(n, |i, j, k, l| -rc(i, k, l, j)),
        t4(n, |i, j, k, l| -rc(i, l, j, k)),
    ]))
}

// VH and VV curvatures in closed form.

fn vh_berwald_closed(c: &Ctx) -> Res {
    Ok(defect(&[c.kind(BER)?.vh0.clone(), c.v.b3.scaled(-1.0)]))
}

fn vh_chern_closed(c: &Ctx) -> Res {
    let n = c.n;
    let dg = c.dy(&c.geo.chern)?;
    let dlm = c.dy(&c.geo.landsberg_mixed)?;
    let vh = &c.kind(CHR)?.vh0;
    Ok(worst(&[
        defect(&[vh.clone(), t4(n, |i, j, k, l| -dg[[k, i, j, l]])]),
        defect(&[vh.clone(), c.v.b3.scaled(-1.0), t4(n, |i, j, k, l| dlm[[k, i, j, l]])]),
    ]))
}

fn vh_cartan_closed(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let dg = c.dy(&c.geo.chern)?;
    let dlm = c.dy(&c.geo.landsberg_mixed)?;
    let hc = c.ch(&c.geo.cartan_mixed, &[U, D, D], CAR)?;
    let vh = &c.kind(CAR)?.vh0;
    let cl = t4(n, |i, j, k, l| sum(n, |m| v.cm[[i, j, m]] * v.lm[[m, k, l]]));
    let hc_l = t4(n, |i, j, k, l| hc[[l, i, j, k]]);
    Ok(worst(&[
        defect(&[vh.clone(), hc_l.clone(), t4(n, |i, j, k, l| -dg[[k, i, j, l]]), cl.scaled(-1.0)]),
        defect(&[vh.clone(), v.b3.scaled(-1.0), t4(n, |i, j, k, l| dlm[[k, i, j, l]]), cl.scaled(-1.0), hc_l]),
    ]))
}

fn vh_hashiguchi_closed(c: &Ctx) -> Res {
    let n = c.n;
    let hb = c.ch(&c.geo.cartan_mixed, &[U, D, D], BER)?;
    Ok(defect(&[c.kind(HAS)?.vh0.clone(), c.v.b3.scaled(-1.0), t4(n, |i, j, k, l| hb[[l, i, j, k]])]))
}

fn chern_vh_trace(c: &Ctx) -> Res {
    let n = c.n;
    let vh = &c.kind(CHR)?.vh0;
    let hi = c.ch(&c.geo.mean_cartan, &[D], BER)?;
    Ok(defect(&[t2(n, |k, l| sum(n, |m| vh[[m, m, k, l]])), t2(n, |k, l| -hi[[l, k]])]))
}

fn cartan_vv(c: &Ctx) -> Tensor<f64> {
    let (n, cm) = (c.n, &c.v.cm);
    t4(n, |i, j, k, l| sum(n, |m| cm[[i, m, l]] * cm[[m, j, k]] - cm[[i, m, k]] * cm[[m, j, l]]))
}

fn vv_closed(c: &Ctx, kind: ConnectionKind) -> Res {
    let vv = c.kind(kind)?.vv0.clone();
    Ok(match kind {
        CAR | HAS => defect(&[vv, cartan_vv(c).scaled(-1.0)]),
        _ => defect(&[vv]),
    })
}

fn cartan_vertical_derivative(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let dcm = c.dy(&c.geo.cartan_mixed)?;
    let c4 = c.cartan4().value()?;
    Ok(defect(&[
        t4(n, |i, j, k, l| dcm[[k, i, j, l]]),
        t4(n, |i, j, k, l| 2.0 * sum(n, |m| v.cm[[i, m, k]] * v.cm[[m, j, l]])),
        t4(n, |i, j, k, l| -sum(n, |m| v.gi[[i, m]] * c4[[m, j, l, k]])),
    ]))
}

fn vv_ricci(c: &Ctx, kind: ConnectionKind) -> Res {
    let (n, v) = (c.n, &c.v);
    let vv = &c.kind(kind)?.vv0;
    Ok(defect(&[
        t2(n, |j, l| sum(n, |s| vv[[s, j, s, l]])),
        t2(n, |j, l| -sum(n, |s| sum(n, |m| v.cm[[s, m, l]] * v.cm[[m, j, s]]))),
        t2(n, |j, l| sum(n, |m| v.i[[m]] * v.cm[[m, j, l]])),
    ]))
}

// Torsions.

fn vh_radial_torsion(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let kd = c.kind(kind)?;
    Ok(defect(&[
        t3(n, |i, k, l| sum(n, |j| kd.vh0[[i, j, k, l]] * c.y[j])),
        t3(n, |i, k, l| -(c.v.b2[[i, k, l]] - kd.h0[[i, k, l]])),
    ]))
}

fn torsions_vanish(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let kd = c.kind(kind)?;
    let (h, v) = (&kd.h0, &kd.v0);
    Ok(worst(&[
        defect(&[t3(n, |k, i, j| h[[k, j, i]]), t3(n, |k, i, j| -h[[k, i, j]])]),
        defect(&[t3(n, |k, i, j| v[[k, j, i]]), t3(n, |k, i, j| -v[[k, i, j]])]),
    ]))
}

fn vertical_torsion_landsberg(c: &Ctx, kind: ConnectionKind) -> Res {
    let kd = c.kind(kind)?;
    let t = c.v.b2.minus(&kd.h0);
    Ok(if kind.berwald_horizontal() { defect(&[t]) } else { defect(&[t, c.v.lm.scaled(-1.0)]) })
}

fn mean_torsions(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let v = &c.kind(kind)?.v0;
    let i = &c.v.i;
    let w = 1.0 / n as f64;
    Ok(worst(&[
        defect(&[t3(n, |k, a, b| v[[k, b, a]]), t3(n, |k, a, b| -w * i[[a]] * delta(k, b))]),
        defect(&[
            t3(n, |k, a, b| v[[k, b, a]] - v[[k, a, b]]),
            t3(n, |k, a, b| -w * (i[[a]] * delta(k, b) - i[[b]] * delta(k, a))),
        ]),
    ]))
}

// Symmetries of the lowered curvatures.

fn cartan_antisymmetry(c: &Ctx) -> Res {
    let n = c.n;
    let kd = c.kind(CAR)?;
    let part = |r: &Tensor<f64>| {
        let a = c.lower(r);
        defect(&[a.clone(), t4(n, |i, j, k, l| a[[j, i, k, l]])])
    };
    Ok(worst(&[part(&kd.hh0), part(&kd.vh0), part(&kd.vv0)]))
}

fn exchange_rc(c: &Ctx) -> Tensor<f64> {
    let (n, v) = (c.n, &c.v);
    let (r, cc) = (&v.r, &v.c);
    t4(n, |i, j, k, l| {
        sum(n, |m| {
            r[[m, k, i]] * cc[[m, j, l]] - r[[m, k, j]] * cc[[m, l, i]] - r[[m, l, i]] * cc[[m, j, k]]
                + r[[m, l, j]] * cc[[m, k, i]]
        })
    })
}

fn exchange_cartan(c: &Ctx) -> Res {
    let n = c.n;
    let a = c.lower(&c.kind(CAR)?.hh0);
    Ok(defect(&[a.clone(), t4(n, |i, j, k, l| -a[[k, l, i, j]]), exchange_rc(c).scaled(-1.0)]))
}

fn exchange_chern(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let a = c.lower(&c.kind(CHR)?.hh0);
    let extra = t4(n, |i, j, k, l| sum(n, |m| -v.r[[m, k, l]] * v.c[[m, j, i]] + v.r[[m, i, j]] * v.c[[m, k, l]]));
    Ok(defect(&[
        a.clone(),
        t4(n, |i, j, k, l| -a[[k, l, i, j]]),
        exchange_rc(c).scaled(-1.0),
        extra.scaled(-1.0),
    ]))
}

fn rc_symmetric(c: &Ctx) -> Tensor<f64> {
    let (n, v) = (c.n, &c.v);
    t4(n, |i, j, k, l| 2.0 * sum(n, |m| v.r[[m, k, l]] * v.c[[i, j, m]]))
}

fn berwald_symmetric_part(c: &Ctx) -> Res {
    let n = c.n;
    let a = c.lower(&c.kind(BER)?.hh0);
    let hcl = c.ch(&c.geo.landsberg, &[D, D, D], CAR)?;
    Ok(defect(&[
        a.clone(),
        t4(n, |i, j, k, l| a[[j, i, k, l]]),
        rc_symmetric(c),
        t4(n, |i, j, k, l| -2.0 * hcl[[k, i, j, l]]),
        t4(n, |i, j, k, l| 2.0 * hcl[[l, i, j, k]]),
    ]))
}

fn chern_symmetric_part(c: &Ctx) -> Res {
    let n = c.n;
    let a = c.lower(&c.kind(CHR)?.hh0);
    Ok(defect(&[a.clone(), t4(n, |i, j, k, l| a[[j, i, k, l]]), rc_symmetric(c)]))
}

fn ri(c: &Ctx) -> Tensor<f64> {
    let (n, v) = (c.n, &c.v);
    t2(n, |k, l| sum(n, |m| v.r[[m, k, l]] * v.i[[m]]))
}

fn berwald_hh_trace(c: &Ctx) -> Res {
    let n = c.n;
    let r = &c.kind(BER)?.hh0;
    let hj = c.ch(&c.geo.mean_landsberg, &[D], CAR)?;
    Ok(defect(&[
        t2(n, |k, l| sum(n, |i| r[[i, i, k, l]])),
        ri(c),
        hj.scaled(-1.0),
        t2(n, |k, l| hj[[l, k]]),
    ]))
}

fn chern_hh_trace(c: &Ctx) -> Res {
    let n = c.n;
    let r = &c.kind(CHR)?.hh0;
    Ok(defect(&[t2(n, |k, l| sum(n, |i| r[[i, i, k, l]])), ri(c)]))
}

fn ricci_terms(c: &Ctx, kind: ConnectionKind) -> Result<[Tensor<f64>; 3], crate::GeometryError> {
    let n = c.n;
    let r = &c.kind(kind)?.hh0;
    let ric = t2(n, |j, l| sum(n, |k| r[[k, j, k, l]]));
    let ri = ri(c);
    Ok([ric.clone(), t2(n, |j, l| -ric[[l, j]]), t2(n, |j, l| -ri[[l, j]])])
}

fn ricci_asymmetry_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let hj = c.ch(&c.geo.mean_landsberg, &[D], CAR)?;
    let mut terms = ricci_terms(c, BER)?.to_vec();
    terms.push(hj.scaled(-1.0));
    terms.push(t2(n, |j, l| hj[[l, j]]));
    Ok(defect(&terms))
}

fn ricci_asymmetry_chern(c: &Ctx) -> Res {
    Ok(defect(&ricci_terms(c, CHR)?))
}

fn ricci_asymmetry_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let mut terms = ricci_terms(c, CAR)?.to_vec();
    terms.push(t2(n, |j, l| -sum(n, |m| sum(n, |s| v.r[[m, j, s]] * v.cm[[s, l, m]]))));
    terms.push(t2(n, |j, l| sum(n, |m| sum(n, |s| v.r[[m, l, s]] * v.cm[[s, j, m]]))));
    Ok(defect(&terms))
}

fn vh_symmetric_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let lb3 = c.lower(&v.b3);
    let hc = c.ch(&c.geo.cartan, &[D, D, D], CAR)?;
    let dl = c.dy(&c.geo.landsberg)?;
    Ok(defect(&[
        lb3.clone(),
        t4(n, |i, j, k, l| lb3[[j, i, k, l]]),
        t4(n, |i, j, k, l| -2.0 * hc[[l, i, j, k]]),
        t4(n, |i, j, k, l| -2.0 * dl[[k, i, j, l]]),
        t4(n, |i, j, k, l| 2.0 * sum(n, |m| v.c[[i, m, k]] * v.lm[[m, j, l]])),
        t4(n, |i, j, k, l| 2.0 * sum(n, |m| v.c[[i, j, m]] * v.lm[[m, k, l]])),
        t4(n, |i, j, k, l| 2.0 * sum(n, |m| v.c[[m, j, k]] * v.lm[[m, i, l]])),
    ]))
}

fn vh_symmetric_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let (g, h, dl) = (&d.lb3, &d.hb3, &d.dl);
    Ok(defect(&[
        g.clone(),
        t4(n, |i, j, k, l| g[[j, i, k, l]]),
        t4(n, |i, j, k, l| -2.0 * h[[l, i, j, k]]),
        t4(n, |i, j, k, l| -2.0 * dl[[k, i, j, l]]),
    ]))
}

fn berwald_curvature_from_landsberg(c: &Ctx) -> Res {
    let n = c.n;
    let d = cartan_derivs(c)?;
    let (h, dl) = (&d.hb3, &d.dl);
    Ok(defect(&[
        d.lb3.clone(),
        h.scaled(-1.0),
        t4(n, |i, j, k, l| -dl[[k, i, j, l]]),
        t4(n, |i, j, k, l| -dl[[j, i, l, k]]),
        t4(n, |i, j, k, l| -dl[[l, i, j, k]]),
        t4(n, |i, j, k, l| 2.0 * dl[[i, j, k, l]]),
    ]))
}

fn berwald_curvature_trace(c: &Ctx) -> Res {
    let n = c.n;
    let b = &c.v.b3;
    let hi = c.ch(&c.geo.mean_cartan, &[D], BER)?;
    let dj = c.dy(&c.geo.mean_landsberg)?;
    Ok(worst(&[
        defect(&[t2(n, |l, k| sum(n, |i| b[[i, i, l, k]])), t2(n, |l, k| -hi[[l, k]]), t2(n, |l, k| -dj[[k, l]])]),
        defect(&[t2(n, |l, k| sum(n, |i| b[[i, i, k, l]])), t2(n, |l, k| -hi[[l, k]]), t2(n, |l, k| -dj[[k, l]])]),
    ]))
}

fn berwald_curvature_double_trace(c: &Ctx) -> Res {
    let n = c.n;
    let (b, gi) = (&c.v.b3, &c.v.gi);
    let raise = |t: &Tensor<Jet>| {
        Tensor::fn1(n, |k| {
            let mut acc = c.geo.zero();
            for m in 0..n {
                acc.add_mul(1.0, &c.geo.g_inv[[k, m]], &t[[m]]);
            }
            acc
        })
    };
    let hi = c.ch(&raise(&c.geo.mean_cartan), &[U], BER)?;
    let dj = c.dy(&raise(&c.geo.mean_landsberg))?;
    let lhs = sum(n, |k| sum(n, |l| gi[[k, l]] * sum(n, |i| b[[i, i, k, l]])));
    Ok(defect(&[
        c.scalar(lhs),
        c.scalar(-sum(n, |k| hi[[k, k]])),
        c.scalar(-sum(n, |k| dj[[k, k]])),
    ]))
}

fn vh_exchange(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let r = &c.kind(kind)?.vh0;
    Ok(defect(&[r.clone(), t4(n, |l, k, i, j| -r[[l, j, i, k]])]))
}

// Second Bianchi identities. Residual tensors are indexed `[l, s, i, j, k]`.

fn bianchi_hhh(c: &Ctx, kind: ConnectionKind) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(kind)?;
    let dr = c.ch(&kd.hh, &[U, D, D, D], kind)?;
    let (h, hh, vh) = (&kd.h0, &kd.hh0, &kd.vh0);
    let mut terms = Vec::new();
    terms.extend(cyclic(n, |l, s, i, j, k| dr[[i, l, s, j, k]]));
    terms.extend(cyclic(n, |l, s, i, j, k| sum(n, |m| vh[[l, s, m, i]] * v.r[[m, j, k]])));
    terms.extend(cyclic(n, |l, s, i, j, k| sum(n, |m| hh[[l, s, m, i]] * (h[[m, k, j]] - h[[m, j, k]]))));
    Ok(defect(&terms))
}

fn bianchi_hhh_berwald(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(BER)?;
    let dr = c.ch(&kd.hh, &[U, D, D, D], BER)?;
    let mut terms = Vec::new();
    terms.extend(cyclic(n, |l, s, i, j, k| dr[[i, l, s, j, k]]));
    terms.extend(cyclic(n, |l, s, i, j, k| sum(n, |m| v.b3[[l, s, m, i]] * v.r[[m, j, k]])));
    Ok(defect(&terms))
}

fn bianchi_hhh_chern(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CHR)?;
    let dr = c.ch(&kd.hh, &[U, D, D, D], CHR)?;
    let dg = c.dy(&c.geo.chern)?;
    let mut terms = Vec::new();
    terms.extend(cyclic(n, |l, s, i, j, k| dr[[i, l, s, j, k]]));
    terms.extend(cyclic(n, |l, s, i, j, k| sum(n, |m| dg[[m, l, s, i]] * v.r[[m, j, k]])));
    Ok(defect(&terms))
}

fn bianchi_hhh_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CAR)?;
    let dr = c.ch(&kd.hh, &[U, D, D, D], CAR)?;
    let dg = c.dy(&c.geo.chern)?;
    let hc = c.ch(&c.geo.cartan_mixed, &[U, D, D], CAR)?;
    let vh = t4(n, |l, s, m, i| dg[[m, l, s, i]] + sum(n, |q| v.cm[[l, s, q]] * v.lm[[q, m, i]]) - hc[[i, l, s, m]]);
    let mut terms = Vec::new();
    terms.extend(cyclic(n, |l, s, i, j, k| dr[[i, l, s, j, k]]));
    terms.extend(cyclic(n, |l, s, i, j, k| sum(n, |m| vh[[l, s, m, i]] * v.r[[m, j, k]])));
    Ok(defect(&terms))
}

fn bianchi_vhh(c: &Ctx, kind: ConnectionKind) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(kind)?;
    let vr = c.cv(&kd.hh, &[U, D, D, D], kind)?;
    let hv = c.ch(&kd.vh, &[U, D, D, D], kind)?;
    let (h, w, hh, vh, vv, b) = (&kd.h0, &kd.v0, &kd.hh0, &kd.vh0, &kd.vv0, &v.b2);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| vr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -hv[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| -sum(n, |q| hh[[l, s, k, q]] * w[[q, j, i]])),
        t5(n, |l, s, i, j, k| sum(n, |q| hh[[l, s, j, q]] * w[[q, k, i]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vv[[l, s, i, q]] * v.r[[q, j, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, q, j]] * (h[[q, i, k]] - b[[q, i, k]]))),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, q, k]] * (h[[q, i, j]] - b[[q, i, j]]))),
        t5(n, |l, s, i, j, k| sum(n, |m| vh[[l, s, i, m]] * (h[[m, j, k]] - h[[m, k, j]]))),
    ]))
}

fn bianchi_vhh_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let kd = c.kind(BER)?;
    let dr = c.dy(&kd.hh)?;
    let hg = c.ch(&c.geo.berwald_curvature, &[U, D, D, D], BER)?;
    Ok(defect(&[
        t5(n, |l, s, i, j, k| dr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| hg[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -hg[[j, l, s, i, k]]),
    ]))
}

fn bianchi_vhh_chern(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CHR)?;
    let dr = c.dy(&kd.hh)?;
    let hv = c.ch(&kd.vh, &[U, D, D, D], CHR)?;
    let vh = &kd.vh0;
    Ok(defect(&[
        t5(n, |l, s, i, j, k| dr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -hv[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, q, j]] * v.lm[[q, i, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, q, k]] * v.lm[[q, i, j]])),
    ]))
}

fn bianchi_vhh_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CAR)?;
    let vr = c.cv(&kd.hh, &[U, D, D, D], CAR)?;
    let hv = c.ch(&kd.vh, &[U, D, D, D], CAR)?;
    let (hh, vh, vv) = (&kd.hh0, &kd.vh0, &kd.vv0);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| vr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -hv[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| -sum(n, |q| hh[[l, s, k, q]] * v.cm[[q, j, i]])),
        t5(n, |l, s, i, j, k| sum(n, |q| hh[[l, s, j, q]] * v.cm[[q, k, i]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vv[[l, s, i, q]] * v.r[[q, j, k]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, q, j]] * v.lm[[q, i, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, q, k]] * v.lm[[q, i, j]])),
    ]))
}

fn bianchi_vvh(c: &Ctx, kind: ConnectionKind) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(kind)?;
    let vr = c.cv(&kd.vh, &[U, D, D, D], kind)?;
    let hv = c.ch(&kd.vv, &[U, D, D, D], kind)?;
    let (h, w, vh, vv, b) = (&kd.h0, &kd.v0, &kd.vh0, &kd.vv0, &v.b2);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| vr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| -vr[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, q, k]] * (w[[q, j, i]] - w[[q, i, j]]))),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, i, q]] * (h[[q, j, k]] - b[[q, j, k]]))),
        t5(n, |l, s, i, j, k| -sum(n, |q| vv[[l, s, j, q]] * (h[[q, i, k]] - b[[q, i, k]]))),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, j, q]] * w[[q, k, i]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, i, q]] * w[[q, k, j]])),
    ]))
}

fn bianchi_vvh_schwarz(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let d = c.dy(&c.kind(kind)?.vh)?;
    Ok(defect(&[t5(n, |l, s, i, j, k| d[[i, l, s, j, k]]), t5(n, |l, s, i, j, k| -d[[j, l, s, i, k]])]))
}

fn bianchi_vvh_berwald(c: &Ctx) -> Res {
    let n = c.n;
    let d = c.dy(&c.geo.berwald_curvature)?;
    Ok(defect(&[t5(n, |l, s, i, j, k| d[[i, l, s, j, k]]), t5(n, |l, s, i, j, k| -d[[j, l, s, i, k]])]))
}

fn bianchi_vvh_chern(c: &Ctx) -> Res {
    bianchi_vvh_schwarz(c, CHR)
}

fn bianchi_vvh_cartan(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CAR)?;
    let vr = c.cv(&kd.vh, &[U, D, D, D], CAR)?;
    let hv = c.ch(&kd.vv, &[U, D, D, D], CAR)?;
    let (vh, vv) = (&kd.vh0, &kd.vv0);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| vr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| -vr[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -sum(n, |q| vv[[l, s, i, q]] * v.lm[[q, j, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, j, q]] * v.lm[[q, i, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vh[[l, s, j, q]] * v.cm[[q, k, i]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, i, q]] * v.cm[[q, k, j]])),
    ]))
}

fn bianchi_vvv(c: &Ctx, kind: ConnectionKind) -> Res {
    let n = c.n;
    let kd = c.kind(kind)?;
    let d = c.cv(&kd.vv, &[U, D, D, D], kind)?;
    let (w, vv) = (&kd.v0, &kd.vv0);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| d[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| d[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| d[[j, l, s, k, i]]),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, q, k]] * (w[[q, j, i]] - w[[q, i, j]]))),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, q, j]] * (w[[q, i, k]] - w[[q, k, i]]))),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, q, i]] * (w[[q, k, j]] - w[[q, j, k]]))),
    ]))
}

fn bianchi_vvv_cartan(c: &Ctx) -> Res {
    let n = c.n;
    let cm = &c.geo.cartan_mixed;
    let zero = c.geo.zero();
    let vv = Tensor::fn4(n, |i, j, k, l| {
        let mut acc = zero.clone();
        for m in 0..n {
            acc.add_mul(1.0, &cm[[i, m, l]], &cm[[m, j, k]]);
            acc.add_mul(-1.0, &cm[[i, m, k]], &cm[[m, j, l]]);
        }
        acc
    });
    let d = c.cv(&vv, &[U, D, D, D], CAR)?;
    Ok(defect(&[
        t5(n, |l, s, i, j, k| d[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| d[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| d[[j, l, s, k, i]]),
    ]))
}

// Regularity and coordinate changes.

fn regularity_determinant_unit(c: &Ctx, kind: ConnectionKind) -> Res {
    let det = regularity_determinant(&c.geo, c.conn(kind)?)?;
    Ok(defect(&[c.scalar(det), c.scalar(-1.0)]))
}

fn cocycle(c: &Ctx) -> Result<(SpraySample, diffeo::CocyclePrediction), crate::GeometryError> {
    let v = &c.v;
    let s = SpraySample { g0: v.sp.clone(), g1: v.nl.clone(), g2: v.b2.clone(), g3: v.b3.clone() };
    let pred = diffeo::predict(c.point, &s)?;
    let computed = crate::spray::spray(c.transformed, &diffeo::push_point(c.point))?;
    Ok((computed, pred))
}

fn cocycle_spray(c: &Ctx) -> Res {
    let (s, p) = cocycle(c)?;
    Ok(defect(&[s.g0, p.spray.scaled(-1.0)]))
}

fn cocycle_nonlinear(c: &Ctx) -> Res {
    let (s, p) = cocycle(c)?;
    Ok(defect(&[s.g1, p.nonlinear.scaled(-1.0)]))
}

fn once(id: &'static str, statement: &'static str, scope: &'static [ConnectionKind], f: fn(&Ctx) -> Res) -> IdentitySpec {
    IdentitySpec { id, statement, scope, residual: Residual::Once(f) }
}

fn per_kind(
    id: &'static str,
    statement: &'static str,
    scope: &'static [ConnectionKind],
    f: fn(&Ctx, ConnectionKind) -> Res,
) -> IdentitySpec {
    IdentitySpec { id, statement, scope, residual: Residual::PerKind(f) }
}

pub(super) fn build() -> Vec<IdentitySpec> {
    vec![
        once("euler-check", "y^i ∂L/∂y^i = 2L", ALL, euler_lagrangian),
        once("metric-homogeneity", "y^s ∂g_jk/∂y^s = 0", ALL, metric_homogeneity),
        once("lagrangian-from-metric", "L = ½ g_ij y^i y^j", ALL, lagrangian_from_metric),
        once("metric-contracted", "g_ij y^i = ∂L/∂y^j", ALL, metric_contracted),
        once("cartan-transverse", "C_ijk y^k = 0", ALL, cartan_transverse),
        once("spray-euler-chain", "𝒢^i_k y^k = 2𝒢^i, 𝒢^i_jk y^k = 𝒢^i_j, 𝒢^i_jkl y^l = 0", ALL, spray_euler_chain),
        once("berwald-curvature-symmetric", "𝒢^i_jkl is symmetric in j, k, l", ALL, berwald_curvature_symmetric),
        once("horizontal-invariance", "δL/δx^k = 0", ALL, horizontal_invariance),
        once(
            "spray-two-forms",
            "2𝒢^i = g^is (∂²L/∂x^k∂y^s y^k − ∂L/∂x^s) = ½ g^is (2∂_j g_sk − ∂_s g_jk) y^j y^k",
            ALL,
            spray_two_forms,
        ),
        once(
            "spray-metric-relation",
            "4C_sij 𝒢^s + 2g_si 𝒢^s_j = y^m ∂³L/∂x^m∂y^i∂y^j + ∂²L/∂x^j∂y^i − ∂²L/∂x^i∂y^j",
            ALL,
            spray_metric_relation,
        ),
        once(
            "metric-transport",
            "y^m ∂g_ij/∂x^m = 4C_sij 𝒢^s + g_si 𝒢^s_j + g_sj 𝒢^s_i",
            ALL,
            metric_transport,
        ),
        once(
            "metric-x-derivative",
            "∂g_ij/∂x^k = −2y^m ∂C_ijk/∂x^m + 4C_sijk 𝒢^s + 4C_sij 𝒢^s_k + 2C_sik 𝒢^s_j + g_si 𝒢^s_jk + 2C_sjk 𝒢^s_i + g_sj 𝒢^s_ik",
            ALL,
            metric_x_derivative,
        ),
        once("berwald-curvature-metric", "𝒢^l_ijk g_lm y^m = ∇^HB_i g_jk", &[BER], berwald_curvature_metric),
        once("metric-horizontal-cartan", "∇^HB_i g_jk = −2 y^l ∇^HB_l C_ijk", &[BER], metric_horizontal_cartan),
        once(
            "landsberg-routes",
            "L_ijk = −½ 𝒢^l_ijk g_lm y^m = −½ ∇^HB_i g_jk = g_il (𝒢^l_jk − Γ^l_jk)",
            NOTABLE,
            landsberg_route_agreement,
        ),
        once("landsberg-symmetric", "L_ijk is symmetric and L_ijk y^k = 0", NOTABLE, landsberg_symmetric_transverse),
        per_kind("regularity", "H^l_jk y^j = 𝒢^l_k", ALL, regularity),
        once("chern-vertical-contraction", "y^j ∂Γ^l_jk/∂y^i = L^l_ik", HORIZONTAL_CHERN, chern_vertical_contraction),
        once("landsberg-from-cartan", "L_ijk = y^l ∇^HC_l C_ijk", HORIZONTAL_CHERN, landsberg_from_cartan),
        once("mean-landsberg-from-cartan", "J_i = y^l ∇^HC_l I_i", HORIZONTAL_CHERN, mean_landsberg_from_cartan),
        once("mean-cartan-volume", "I_i = ∂ ln sqrt|det g| / ∂y^i", ALL, mean_cartan_volume),
        once(
            "berwald-curvature-cartan",
            "g_is 𝒢^s_jkl = y^m ∇^HB_m C_ijkl − ∇^HB_i C_jkl + ∇^HB_j C_ikl + ∇^HB_k C_jil + ∇^HB_l C_jki",
            &[BER],
            berwald_curvature_cartan,
        ),
        once(
            "landsberg-vertical-derivative",
            "∂L_jkl/∂y^i = ∇^HB_i C_jkl + y^m ∇^HB_m C_ijkl",
            &[BER],
            landsberg_vertical_derivative,
        ),
        once(
            "berwald-curvature-radial-cartan",
            "g_is 𝒢^s_jkl = ∂(y^m ∇^HB_m C_jkl)/∂y^i − 2∇^HB_i C_jkl + ∇^HB_j C_ikl + ∇^HB_k C_jil + ∇^HB_l C_jki",
            &[BER],
            berwald_curvature_radial_cartan,
        ),
        once(
            "cartan-horizontal-from-berwald",
            "2∇^HB_l C_ijk = ∂(y^m g_ms 𝒢^s_ijk)/∂y^l + g_is 𝒢^s_jkl + g_js 𝒢^s_ikl + g_ks 𝒢^s_jil − g_ls 𝒢^s_jki",
            &[BER],
            cartan_horizontal_from_berwald,
        ),
        once(
            "berwald-curvature-landsberg",
            "g_is 𝒢^s_jkl = −∂_i L_jkl + ∂_j L_ikl + ∂_k L_jil + ∂_l L_jki − y^m ∇^HB_m C_ijkl",
            &[BER],
            berwald_curvature_landsberg,
        ),
        once("chern-trace", "Γ^l_li = δ_i ln sqrt|det g|", HORIZONTAL_CHERN, chern_trace),
        once("berwald-trace", "𝒢^l_li = δ_i ln sqrt|det g| + J_i", &[BER], berwald_trace),
        once("volume-cartan-horizontal", "∇^HC μ = 0", &[CAR], volume_cartan_horizontal),
        once("volume-cartan-vertical", "∇^VC μ = 0", &[CAR], volume_cartan_vertical),
        once("volume-berwald-horizontal", "∇^HB_s μ = −J_s μ", &[BER], volume_berwald_horizontal),
        once("volume-berwald-vertical", "∇^VB_s μ = I_s μ", &[BER], volume_berwald_vertical),
        per_kind("volume-mean-vertical", "∇^V μ = 0 for the mean-Cartan vertical coefficients", MEAN, volume_mean_vertical),
        once("nonlinear-bianchi-berwald", "∇^HB_[i R^a_jk] = 0", &[BER], nonlinear_bianchi_berwald),
        once(
            "nonlinear-bianchi-chern",
            "∇^HC_[i R^a_jk] + R^l_[jk L^a_i]l = 0",
            HORIZONTAL_CHERN,
            nonlinear_bianchi_chern,
        ),
        once("nonlinear-first-bianchi", "∂R^l_[jk/∂y^i] = 0", ALL, nonlinear_first_bianchi),
        per_kind("hh-radial", "R^HH i_jkl y^j = R^i_kl + V^i_jm y^j R^m_kl", ALL, hh_radial),
        once("berwald-hh-from-curvature", "∂R^i_kl/∂y^j = R^HH_Ber i_jkl", &[BER], berwald_hh_from_curvature),
        once(
            "berwald-chern-hh",
            "R_Ber = R_ChR + ∇^HC_k L^i_jl − ∇^HC_l L^i_jk + g^is (L_skm L_jln − L_slm L_jkn) g^mn",
            &[BER, CHR],
            berwald_chern_hh,
        ),
        once(
            "berwald-chern-hh-lowered",
            "R_Ber ijkl = R_ChR ijkl + ∇^HC_k L_ijl − ∇^HC_l L_ijk + (L_ikm L_jln − L_ilm L_jkn) g^mn",
            &[BER, CHR],
            berwald_chern_hh_lowered,
        ),
        once("cartan-chern-hh", "R_Car i_jkl = R_ChR i_jkl + R^m_kl C^i_jm", &[CAR, CHR], cartan_chern_hh),
        per_kind("first-bianchi", "R^HH i_[jkl] = 0", &[BER, CHR], first_bianchi),
        once("first-bianchi-cartan", "R_Car i_[jkl] = R^m_[jk C^i_l]m", &[CAR], first_bianchi_cartan),
        once("vh-berwald-closed", "R^VH_Ber i_jkl = 𝒢^i_jkl", &[BER], vh_berwald_closed),
        once(
            "vh-cartan-closed",
            "R^VH_Car i_jkl = −∇^HC_l C^i_jk + ∂Γ^i_jl/∂y^k + C^i_jm L^m_kl = 𝒢^i_jkl − ∂L^i_jl/∂y^k + C^i_jm L^m_kl − ∇^HC_l C^i_jk",
            &[CAR],
            vh_cartan_closed,
        ),
        once(
            "vh-chern-closed",
            "R^VH_ChR i_jkl = ∂Γ^i_jl/∂y^k = 𝒢^i_jkl − ∂L^i_jl/∂y^k",
            &[CHR],
            vh_chern_closed,
        ),
        once("vh-hashiguchi-closed", "R^VH_Has i_jkl = 𝒢^i_jkl − ∇^HB_l C^i_jk", &[HAS], vh_hashiguchi_closed),
        once("chern-vh-trace", "R^VH_ChR m_mkl = ∇^HB_l I_k", &[CHR], chern_vh_trace),
        per_kind(
            "vv-closed",
            "R^VV i_jkl = C^i_ml C^m_jk − C^i_mk C^m_jl (Cartan, Hashiguchi), 0 otherwise",
            NOTABLE,
            vv_closed,
        ),
        once(
            "cartan-vertical-derivative",
            "∂C^i_jl/∂y^k = −2C^i_mk C^m_jl + g^im C_mjlk",
            ALL,
            cartan_vertical_derivative,
        ),
        per_kind("vv-ricci", "R^VV s_jsl = C^s_ml C^m_js − I_m C^m_jl", &[CAR, HAS], vv_ricci),
        per_kind("vh-radial-torsion", "R^VH i_jkl y^j = T_ver^VH i_kl", NOTABLE, vh_radial_torsion),
        per_kind("torsions-vanish", "T_hor^HH = 0 and T_ver^VV = 0", NOTABLE, torsions_vanish),
        per_kind(
            "vertical-torsion-landsberg",
            "T_ver^VH = L (Cartan, Chern-Rund), 0 (Berwald, Hashiguchi)",
            NOTABLE,
            vertical_torsion_landsberg,
        ),
        per_kind(
            "mean-torsions",
            "T_hor^VH k_ij = (1/n) I_i δ^k_j and T_ver^VV k_ij = (1/n)(I_i δ^k_j − I_j δ^k_i)",
            MEAN,
            mean_torsions,
        ),
        once(
            "cartan-antisymmetry",
            "R^HH_Car ijkl, R^VH_Car ijkl, R^VV_Car ijkl are antisymmetric in i, j",
            &[CAR],
            cartan_antisymmetry,
        ),
        once(
            "exchange-cartan",
            "R_Car ijkl − R_Car klij = R^m_ki C_mjl − R^m_kj C_mli − R^m_li C_mjk + R^m_lj C_mki",
            &[CAR],
            exchange_cartan,
        ),
        once(
            "exchange-chern",
            "R_ChR ijkl − R_ChR klij = R^m_ki C_mjl − R^m_kj C_mli − R^m_li C_mjk + R^m_lj C_mki − R^m_kl C_mji + R^m_ij C_mkl",
            &[CHR],
            exchange_chern,
        ),
        once(
            "berwald-symmetric-part",
            "R_Ber ijkl + R_Ber jikl = −2R^m_kl C_ijm + 2(∇^HC_k L_ijl − ∇^HC_l L_ijk)",
            &[BER],
            berwald_symmetric_part,
        ),
        once("chern-symmetric-part", "R_ChR ijkl + R_ChR jikl = −2R^m_kl C_ijm", &[CHR], chern_symmetric_part),
        once("berwald-hh-trace", "R_Ber i_ikl = −R^m_kl I_m + ∇^HC_k J_l − ∇^HC_l J_k", &[BER], berwald_hh_trace),
        once("chern-hh-trace", "R_ChR i_ikl = −R^m_kl I_m", &[CHR], chern_hh_trace),
        once(
            "ricci-asymmetry-berwald",
            "R_Ber k_jkl − R_Ber k_lkj = R^m_lj I_m + ∇^HC_j J_l − ∇^HC_l J_j",
            &[BER],
            ricci_asymmetry_berwald,
        ),
        once("ricci-asymmetry-chern", "R_ChR k_jkl − R_ChR k_lkj = R^m_lj I_m", &[CHR], ricci_asymmetry_chern),
        once(
            "ricci-asymmetry-cartan",
            "R_Car k_jkl − R_Car k_lkj = R^m_lj I_m + R^m_js C^s_lm − R^m_ls C^s_jm",
            &[CAR],
            ricci_asymmetry_cartan,
        ),
        once(
            "vh-symmetric-cartan",
            "𝒢_ijkl + 𝒢_jikl − 2∇^HC_l C_ijk − 2∂L_ijl/∂y^k + 2C_imk L^m_jl + 2C_ijm L^m_kl + 2C_mjk L^m_il = 0",
            &[CAR],
            vh_symmetric_cartan,
        ),
        once(
            "vh-symmetric-berwald",
            "𝒢_ijkl + 𝒢_jikl − 2∇^HB_l C_ijk − 2∂L_ijl/∂y^k = 0",
            &[BER],
            vh_symmetric_berwald,
        ),
        once(
            "berwald-curvature-from-landsberg",
            "𝒢_ijkl = ∇^HB_i C_jkl + ∂_k L_ijl + ∂_j L_ilk + ∂_l L_ijk − 2∂_i L_jkl",
            &[BER],
            berwald_curvature_from_landsberg,
        ),
        once("berwald-curvature-trace", "𝒢^i_ilk = 𝒢^i_ikl = ∇^HB_l I_k + ∂J_l/∂y^k", &[BER], berwald_curvature_trace),
        once(
            "berwald-curvature-double-trace",
            "g^kl 𝒢^i_ikl = ∇^HB_k I^k + ∂J^k/∂y^k",
            &[BER],
            berwald_curvature_double_trace,
        ),
        per_kind("vh-exchange", "R^VH l_kij = R^VH l_jik", &[BER, CHR], vh_exchange),
        per_kind(
            "bianchi-hhh",
            "Σ_cyc(ijk) [∇^H_i R^HH l_sjk + R^VH l_smi R^m_jk + R^HH l_smi (H^m_kj − H^m_jk)] = 0",
            ALL,
            bianchi_hhh,
        ),
        once(
            "bianchi-hhh-berwald",
            "Σ_cyc(ijk) [∇^HB_i R_Ber l_sjk + 𝒢^l_smi R^m_jk] = 0",
            &[BER],
            bianchi_hhh_berwald,
        ),
        once(
            "bianchi-hhh-chern",
            "Σ_cyc(ijk) [∇^HC_i R_ChR l_sjk + ∂Γ^l_si/∂y^m R^m_jk] = 0",
            &[CHR],
            bianchi_hhh_chern,
        ),
        once(
            "bianchi-hhh-cartan",
            "Σ_cyc(ijk) [∇^HC_i R_Car l_sjk + (∂Γ^l_si/∂y^m + C^l_sn L^n_mi − ∇^HC_i C^l_sm) R^m_jk] = 0",
            &[CAR],
            bianchi_hhh_cartan,
        ),
        per_kind(
            "bianchi-vhh",
            "∇^V_i R^HH l_sjk + ∇^H_k R^VH l_sij − ∇^H_j R^VH l_sik − R^HH l_skb V^b_ji + R^HH l_sjb V^b_ki − R^VV l_sib R^b_jk + R^VH l_sbj (H^b_ik − N^b_ik) − R^VH l_sbk (H^b_ij − N^b_ij) + R^VH l_sim (H^m_jk − H^m_kj) = 0",
            ALL,
            bianchi_vhh,
        ),
        once(
            "bianchi-vhh-berwald",
            "∂R_Ber l_sjk/∂y^i + ∇^HB_k 𝒢^l_sij − ∇^HB_j 𝒢^l_sik = 0",
            &[BER],
            bianchi_vhh_berwald,
        ),
        once(
            "bianchi-vhh-chern",
            "∂R_ChR l_sjk/∂y^i + ∇^HC_k R^VH l_sij − ∇^HC_j R^VH l_sik − R^VH l_sbj L^b_ik + R^VH l_sbk L^b_ij = 0",
            &[CHR],
            bianchi_vhh_chern,
        ),
        once(
            "bianchi-vhh-cartan",
            "∇^VC_i R^HH l_sjk + ∇^HC_k R^VH l_sij − ∇^HC_j R^VH l_sik − R^HH l_skb C^b_ji + R^HH l_sjb C^b_ki − R^VV l_sib R^b_jk − R^VH l_sbj L^b_ik + R^VH l_sbk L^b_ij = 0",
            &[CAR],
            bianchi_vhh_cartan,
        ),
        per_kind(
            "bianchi-vvh",
            "∇^V_i R^VH l_sjk − ∇^V_j R^VH l_sik + ∇^H_k R^VV l_sij + R^VH l_sbk (V^b_ji − V^b_ij) + R^VV l_sib (H^b_jk − N^b_jk) − R^VV l_sjb (H^b_ik − N^b_ik) + R^VH l_sjb V^b_ki − R^VH l_sib V^b_kj = 0",
            ALL,
            bianchi_vvh,
        ),
        once("bianchi-vvh-berwald", "∂𝒢^l_sjk/∂y^i = ∂𝒢^l_sik/∂y^j", &[BER], bianchi_vvh_berwald),
        once("bianchi-vvh-chern", "∂R^VH_ChR l_sjk/∂y^i = ∂R^VH_ChR l_sik/∂y^j", &[CHR], bianchi_vvh_chern),
        once(
            "bianchi-vvh-cartan",
            "∇^VC_i R^VH l_sjk − ∇^VC_j R^VH l_sik + ∇^HC_k R^VV l_sij − R^VV l_sib L^b_jk + R^VV l_sjb L^b_ik + R^VH l_sjb C^b_ki − R^VH l_sib C^b_kj = 0",
            &[CAR],
            bianchi_vvh_cartan,
        ),
        per_kind(
            "bianchi-vvv",
            "Σ_cyc(ijk) ∇^V_i R^VV l_sjk + R^VV l_sbk (V^b_ji − V^b_ij) + R^VV l_sbj (V^b_ik − V^b_ki) + R^VV l_sbi (V^b_kj − V^b_jk) = 0",
            ALL,
            bianchi_vvv,
        ),
        once(
            "bianchi-vvv-cartan",
            "Σ_cyc(ijk) ∇^VC_i R^VV l_sjk = 0 with R^VV i_jkl = C^i_ml C^m_jk − C^i_mk C^m_jl",
            &[CAR],
            bianchi_vvv_cartan,
        ),
        per_kind(
            "regularity-determinant",
            "det(δ^a_c + V^a_bc y^b) = 1, in particular det(δ^k_i + (1/n) I_i y^k) = 1",
            ALL,
            regularity_determinant_unit,
        ),
        once(
            "cocycle-spray",
            "G̃^i = M^i_j G^j − ½ M^i_{j,k} y^j y^k under the test change of coordinates",
            ALL,
            cocycle_spray,
        ),
        once(
            "cocycle-nonlinear",
            "Ñ^a_j = (M^a_b N^b_k − M^a_{b,k} y^b) ∂x^k/∂x̃^j under the test change of coordinates",
            ALL,
            cocycle_nonlinear,
        ),
    ]
}

/// The Cartan VVH identity with the index placement `R^VV l_sbj L^b_ik` and
/// `R^VH l_sbk C^b_ki` in the two middle terms. Kept to measure how far it is
/// from holding.
#[cfg(test)]
fn bianchi_vvh_cartan_alternative(c: &Ctx) -> Res {
    let (n, v) = (c.n, &c.v);
    let kd = c.kind(CAR)?;
    let vr = c.cv(&kd.vh, &[U, D, D, D], CAR)?;
    let hv = c.ch(&kd.vv, &[U, D, D, D], CAR)?;
    let (vh, vv) = (&kd.vh0, &kd.vv0);
    Ok(defect(&[
        t5(n, |l, s, i, j, k| vr[[i, l, s, j, k]]),
        t5(n, |l, s, i, j, k| -vr[[j, l, s, i, k]]),
        t5(n, |l, s, i, j, k| hv[[k, l, s, i, j]]),
        t5(n, |l, s, i, j, k| -sum(n, |q| vv[[l, s, i, q]] * v.lm[[q, j, k]])),
        t5(n, |l, s, i, j, k| sum(n, |q| vv[[l, s, q, j]] * v.lm[[q, i, k]])),
        t5(n, |l, s, i, _j, k| sum(n, |q| vh[[l, s, q, k]] * v.cm[[q, k, i]])),
        t5(n, |l, s, i, j, k| -sum(n, |q| vh[[l, s, i, q]] * v.cm[[q, k, j]])),
    ]))
}

#[cfg(test)]
mod tests {
    //! Deliberately wrong variants must fail, so that passing residuals mean something.

    use super::*;
    use crate::lagrangian::{Body, EvalOptions, LagrangianDef, TangentPoint};

    fn randers3() -> LagrangianDef {
        let src = "dim: 3\nranders: a = [1 + 0.1*x2^2, 0.1*x0, 0; 0.1*x0, 1, 0; 0, 0, 1 + 0.05*x1]; \
                   b = [0.1*x1, 0.05*x2*x0, 0.1*sin(x0)]\n";
        let d = LagrangianDef::parse(src).unwrap();
        assert!(matches!(d.body, Body::Randers { .. }));
        d.clone().with_options(EvalOptions { homogeneity_tol: None, ..d.options })
    }

    fn with_ctx(f: impl Fn(&Ctx)) {
        let d = randers3();
        let t = diffeo::transformed(&d);
        let p = TangentPoint::new(vec![0.9, 1.4, 2.1], vec![0.7, -0.4, 1.1]);
        let c = Ctx::new(&d, &t, &p).unwrap();
        f(&c)
    }

    #[test]
    fn correct_forms_hold() {
        with_ctx(|c| {
            assert!(bianchi_vvh_cartan(c).unwrap() < 1e-12);
            assert!(exchange_chern(c).unwrap() < 1e-12);
            assert!(hh_radial(c, MBE).unwrap() < 1e-12);
        });
    }

    #[test]
    fn alternative_cartan_vvh_fails() {
        with_ctx(|c| {
            let r = bianchi_vvh_cartan_alternative(c).unwrap();
            assert!(r > 1e-4, "{r}");
        });
    }

    #[test]
    fn dropped_terms_are_detected() {
        with_ctx(|c| {
            let n = c.n;
            let v = &c.v;

            // The radial HH contraction without its V term, for a kind with V y ≠ 0.
            let kd = c.kind(MBE).unwrap();
            let r = defect(&[t3(n, |i, k, l| sum(n, |j| kd.hh0[[i, j, k, l]] * c.y[j])), v.r.scaled(-1.0)]);
            assert!(r > 1e-4, "{r}");

            // The Chern-Rund exchange law with the Cartan right-hand side.
            let a = c.lower(&c.kind(CHR).unwrap().hh0);
            let r = defect(&[a.clone(), t4(n, |i, j, k, l| -a[[k, l, i, j]]), exchange_rc(c).scaled(-1.0)]);
            assert!(r > 1e-4, "{r}");

            // Spray transformation without the second-derivative term.
            let (s, _) = cocycle(c).unwrap();
            let m = diffeo::jacobian(&c.point.x);
            let naive = Tensor::fn1(n, |i| -sum(n, |j| m[[i, j]] * v.sp[[j]]));
            let r = defect(&[s.g0, naive]);
            assert!(r > 1e-4, "{r}");

            // The Chern-Rund VH curvature taken to be the Berwald one.
            let r = defect(&[c.kind(CHR).unwrap().vh0.clone(), v.b3.scaled(-1.0)]);
            assert!(r > 1e-4, "{r}");

            // Cartan HHH Bianchi without its VH term.
            let kd = c.kind(CAR).unwrap();
            let dr = c.ch(&kd.hh, &[U, D, D, D], CAR).unwrap();
            let r = defect(&cyclic(n, |l, s, i, j, k| dr[[i, l, s, j, k]]));
            assert!(r > 1e-6, "{r}");
        });
    }
}

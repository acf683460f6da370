//! Curvatures, torsions, the Landsberg tensor and volume-form derivatives.

use crate::error::GeometryError;
use crate::geometry::{ConnectionJets, ConnectionKind, PointGeometry, Slot};
use crate::spray::volume_form;
use crate::lagrangian::{LagrangianDef, TangentPoint};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub kind: ConnectionKind,
    /// `R^a_ij`.
    pub r: Tensor<f64>,
    pub rhh: Tensor<f64>,
    pub rvh: Tensor<f64>,
    pub rvv: Tensor<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandsbergSample {
    pub l3: Tensor<f64>,
    pub j: Tensor<f64>,
    pub e: Tensor<f64>,
    /// Largest pairwise difference between the three routes.
    pub route_spread: f64,
}

/// Torsion projections, each stored `[k, i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionSample {
    pub kind: ConnectionKind,
    pub hor_hh: Tensor<f64>,
    pub hor_vh: Tensor<f64>,
    pub ver_vv: Tensor<f64>,
    pub ver_vh: Tensor<f64>,
    pub ver_hh: Tensor<f64>,
}

pub fn nonlinear_curvature(def: &LagrangianDef, p: &TangentPoint) -> Result<Tensor<f64>, GeometryError> {
    Ok(PointGeometry::new(def, p)?.curvature.value()?)
}

pub fn hh_curvature(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<Tensor<f64>, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    Ok(geo.hh_curvature(&geo.connection(kind)).value()?)
}

pub fn vh_curvature(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<Tensor<f64>, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    Ok(geo.vh_curvature(&geo.connection(kind)).value()?)
}

pub fn vv_curvature(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<Tensor<f64>, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    Ok(geo.vv_curvature(&geo.connection(kind)).value()?)
}

pub fn curvature_from(geo: &PointGeometry, kind: ConnectionKind) -> Result<CurvatureSample, GeometryError> {
    let conn = geo.connection(kind);
    Ok(CurvatureSample {
        kind,
        r: geo.curvature.value()?,
        rhh: geo.hh_curvature(&conn).value()?,
        rvh: geo.vh_curvature(&conn).value()?,
        rvv: geo.vv_curvature(&conn).value()?,
    })
}

pub fn curvature(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<CurvatureSample, GeometryError> {
    curvature_from(&PointGeometry::new(def, p)?, kind)
}

pub fn torsion_from(geo: &PointGeometry, conn: &ConnectionJets) -> Result<TorsionSample, GeometryError> {
    let h = conn.h.value()?;
    let v = conn.v.value()?;
    let b = geo.berwald.value()?;
    Ok(TorsionSample {
        kind: conn.kind,
        hor_hh: Tensor::fn3(geo.n, |k, i, j| h[[k, j, i]] - h[[k, i, j]]),
        hor_vh: Tensor::fn3(geo.n, |k, i, j| v[[k, j, i]]),
        ver_vv: Tensor::fn3(geo.n, |k, i, j| v[[k, j, i]] - v[[k, i, j]]),
        ver_vh: Tensor::fn3(geo.n, |k, i, j| b[[k, i, j]] - h[[k, i, j]]),
        ver_hh: geo.curvature.value()?,
    })
}

pub fn torsion_projections(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<TorsionSample, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    torsion_from(&geo, &geo.connection(kind))
}

/// The Landsberg tensor by its three routes.
pub struct LandsbergRoutes {
    /// `−½ 𝒢^l_ijk g_lm y^m`.
    pub from_berwald_curvature: Tensor<f64>,
    /// `−½ ∇^{HB}_i g_jk`.
    pub from_metric_derivative: Tensor<f64>,
    /// `g_il (𝒢^l_jk − Γ^l_jk)`.
    pub from_difference: Tensor<f64>,
}

pub fn landsberg_routes(geo: &PointGeometry) -> Result<LandsbergRoutes, GeometryError> {
    let n = geo.n;
    let y = &geo.point.y;
    let g = geo.g.value()?;
    let b3 = geo.berwald_curvature.value()?;
    let a = Tensor::fn3(n, |i, j, k| {
        let mut s = 0.0;
        for l in 0..n {
            for m in 0..n {
                s += b3[[l, i, j, k]] * g[[l, m]] * y[m];
            }
        }
        -0.5 * s
    });
    let ber = geo.connection(ConnectionKind::Berwald);
    let b = geo.cov_h(&geo.g, &[Slot::Down, Slot::Down], &ber).value()?.scaled(-0.5);
    Ok(LandsbergRoutes { from_berwald_curvature: a, from_metric_derivative: b, from_difference: geo.landsberg.value()? })
}

pub fn landsberg_from(geo: &PointGeometry) -> Result<LandsbergSample, GeometryError> {
    let r = landsberg_routes(geo)?;
    let spread = r
        .from_berwald_curvature
        .max_diff(&r.from_metric_derivative)
        .max(r.from_berwald_curvature.max_diff(&r.from_difference))
        .max(r.from_metric_derivative.max_diff(&r.from_difference));
    Ok(LandsbergSample {
        l3: r.from_difference,
        j: geo.mean_landsberg.value()?,
        e: geo.mean_berwald.value()?,
        route_spread: spread,
    })
}

pub fn landsberg(def: &LagrangianDef, p: &TangentPoint) -> Result<LandsbergSample, GeometryError> {
    landsberg_from(&PointGeometry::new(def, p)?)
}

/// Residuals of the four volume-form identities, relative to `|μ|`:
/// `∇^{HC} μ`, `∇^{VC} μ`, `∇^{HB}_s μ + J_s μ`, `∇^{VB}_s μ − I_s μ`.
pub fn volume_residuals(geo: &PointGeometry) -> Result<[f64; 4], GeometryError> {
    let n = geo.n;
    let mu = volume_form(geo);
    let slots = vec![Slot::Down; n];
    let car = geo.connection(ConnectionKind::Cartan);
    let ber = geo.connection(ConnectionKind::Berwald);
    let mu0 = mu.value()?;
    let scale = geo.volume.value()?.abs();
    let j = geo.mean_landsberg.value()?;
    let ic = geo.mean_cartan.value()?;
    let hc = geo.cov_h(&mu, &slots, &car).value()?;
    let vc = geo.cov_v(&mu, &slots, &car).value()?;
    let hb = geo.cov_h(&mu, &slots, &ber).value()?;
    let vb = geo.cov_v(&mu, &slots, &ber).value()?;
    let with = |d: &Tensor<f64>, w: &Tensor<f64>, sign: f64| {
        Tensor::from_fn(n, n + 1, |idx| d.get(idx) + sign * w[[idx[0]]] * mu0.get(&idx[1..])).max_abs()
    };
    Ok([
        hc.max_abs() / scale,
        vc.max_abs() / scale,
        with(&hb, &j, 1.0) / scale,
        with(&vb, &ic, -1.0) / scale,
    ])
}

pub fn volume_derivatives(def: &LagrangianDef, p: &TangentPoint) -> Result<[f64; 4], GeometryError> {
    volume_residuals(&PointGeometry::new(def, p)?)
}

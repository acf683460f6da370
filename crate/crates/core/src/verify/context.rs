//! Per-point evaluation context shared by all identities.

use std::cell::OnceCell;

use crate::error::GeometryError;
use crate::geometry::{ConnectionJets, ConnectionKind, PointGeometry, Slot, DEEP_ORDERS};
use crate::jet::Jet;
use crate::lagrangian::{LagrangianDef, TangentPoint};
use crate::tensor::{sum, Tensor};

pub(crate) type Res = Result<f64, GeometryError>;

/// Values of the kind-independent tensors.
pub(crate) struct Vals {
    pub l: f64,
    pub g: Tensor<f64>,
    pub gi: Tensor<f64>,
    pub c: Tensor<f64>,
    pub cm: Tensor<f64>,
    pub i: Tensor<f64>,
    pub ls: Tensor<f64>,
    pub lm: Tensor<f64>,
    pub j: Tensor<f64>,
    pub sp: Tensor<f64>,
    pub nl: Tensor<f64>,
    pub b2: Tensor<f64>,
    pub b3: Tensor<f64>,
    pub gam: Tensor<f64>,
    pub r: Tensor<f64>,
}

/// A connection with its curvatures, as jets and as values.
pub(crate) struct KindData {
    pub conn: ConnectionJets,
    pub hh: Tensor<Jet>,
    pub vh: Tensor<Jet>,
    pub vv: Tensor<Jet>,
    pub h0: Tensor<f64>,
    pub v0: Tensor<f64>,
    pub hh0: Tensor<f64>,
    pub vh0: Tensor<f64>,
    pub vv0: Tensor<f64>,
}

pub(crate) struct Ctx<'a> {
    pub transformed: &'a LagrangianDef,
    pub point: &'a TangentPoint,
    pub geo: PointGeometry,
    pub n: usize,
    pub y: Vec<f64>,
    pub v: Vals,
    kinds: [OnceCell<Result<KindData, GeometryError>>; 6],
}

impl<'a> Ctx<'a> {
    pub fn new(def: &'a LagrangianDef, transformed: &'a LagrangianDef, point: &'a TangentPoint) -> Result<Self, GeometryError> {
        let geo = PointGeometry::with_orders(def, point, DEEP_ORDERS)?;
        let v = Vals {
            l: geo.l.value()?,
            g: geo.g.value()?,
            gi: geo.g_inv.value()?,
            c: geo.cartan.value()?,
            cm: geo.cartan_mixed.value()?,
            i: geo.mean_cartan.value()?,
            ls: geo.landsberg.value()?,
            lm: geo.landsberg_mixed.value()?,
            j: geo.mean_landsberg.value()?,
            sp: geo.spray.value()?,
            nl: geo.nonlinear.value()?,
            b2: geo.berwald.value()?,
            b3: geo.berwald_curvature.value()?,
            gam: geo.chern.value()?,
            r: geo.curvature.value()?,
        };
        Ok(Ctx {
            transformed,
            point,
            n: geo.n,
            y: point.y.clone(),
            geo,
            v,
            kinds: Default::default(),
        })
    }

    pub fn kind(&self, kind: ConnectionKind) -> Result<&KindData, GeometryError> {
        self.kinds[kind.slot()]
            .get_or_init(|| {
                let conn = self.geo.connection(kind);
                let hh = self.geo.hh_curvature(&conn);
                let vh = self.geo.vh_curvature(&conn);
                let vv = self.geo.vv_curvature(&conn);
                Ok(KindData {
                    h0: conn.h.value()?,
                    v0: conn.v.value()?,
                    hh0: hh.value()?,
                    vh0: vh.value()?,
                    vv0: vv.value()?,
                    conn,
                    hh,
                    vh,
                    vv,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn conn(&self, kind: ConnectionKind) -> Result<&ConnectionJets, GeometryError> {
        Ok(&self.kind(kind)?.conn)
    }

    /// `∇^H T` for the connection of `kind`, derivative index first.
    pub fn cov_h(&self, t: &Tensor<Jet>, slots: &[Slot], kind: ConnectionKind) -> Result<Tensor<Jet>, GeometryError> {
        Ok(self.geo.cov_h(t, slots, self.conn(kind)?))
    }

    pub fn cov_v(&self, t: &Tensor<Jet>, slots: &[Slot], kind: ConnectionKind) -> Result<Tensor<Jet>, GeometryError> {
        Ok(self.geo.cov_v(t, slots, self.conn(kind)?))
    }

    pub fn ch(&self, t: &Tensor<Jet>, slots: &[Slot], kind: ConnectionKind) -> Result<Tensor<f64>, GeometryError> {
        Ok(self.cov_h(t, slots, kind)?.value()?)
    }

    pub fn cv(&self, t: &Tensor<Jet>, slots: &[Slot], kind: ConnectionKind) -> Result<Tensor<f64>, GeometryError> {
        Ok(self.cov_v(t, slots, kind)?.value()?)
    }

    /// `∂_{y^k}` of every component, derivative index first.
    pub fn dy(&self, t: &Tensor<Jet>) -> Result<Tensor<f64>, GeometryError> {
        Ok(t.grad_y().value()?)
    }

    /// `C_ijkl = ∂_{y^l} C_ijk` as jets.
    pub fn cartan4(&self) -> Tensor<Jet> {
        let d = self.geo.cartan.grad_y();
        Tensor::fn4(self.n, |i, j, k, l| d[[l, i, j, k]].clone())
    }

    /// Lowers the first index of a value tensor.
    pub fn lower(&self, t: &Tensor<f64>) -> Tensor<f64> {
        contract_first(&self.v.g, t)
    }

    pub fn raise(&self, t: &Tensor<f64>) -> Tensor<f64> {
        contract_first(&self.v.gi, t)
    }

    /// `y^m T[m, ...]`.
    pub fn radial(&self, t: &Tensor<f64>) -> Tensor<f64> {
        let n = self.n;
        Tensor::from_fn(n, t.rank() - 1, |idx| {
            let mut src = vec![0; idx.len() + 1];
            src[1..].copy_from_slice(idx);
            sum(n, |m| {
                src[0] = m;
                self.y[m] * t.get(&src)
            })
        })
    }

    pub fn scalar(&self, v: f64) -> Tensor<f64> {
        Tensor::from_vec(self.n, 0, vec![v])
    }
}

fn contract_first(m: &Tensor<f64>, t: &Tensor<f64>) -> Tensor<f64> {
    let n = t.n();
    Tensor::from_fn(n, t.rank(), |idx| {
        let mut src = idx.to_vec();
        sum(n, |s| {
            src[0] = s;
            m[[idx[0], s]] * t.get(&src)
        })
    })
}

/// `max|Σ terms| / (1 + max|term|)`; non-finite input gives infinity.
pub(crate) fn defect(terms: &[Tensor<f64>]) -> f64 {
    let first = &terms[0];
    let mut total = vec![0.0; first.data().len()];
    let mut scale: f64 = 0.0;
    for t in terms {
        assert_eq!(t.rank(), first.rank(), "identity terms must share a shape");
        for (a, b) in total.iter_mut().zip(t.data()) {
            *a += b;
        }
        if !t.is_finite() {
            return f64::INFINITY;
        }
        scale = scale.max(t.max_abs());
    }
    let d = total.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + scale);
    if d.is_finite() {
        d
    } else {
        f64::INFINITY
    }
}

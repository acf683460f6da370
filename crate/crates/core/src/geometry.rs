//! Jet-valued geometry at a single tangent point.
//!
//! Everything here is computed from one jet of `L`, so derivatives of any
//! tensor in `x` or `y` remain available up to the remaining jet order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::GeometryError;
use crate::jet::{ElemFn, Jet, Layout};
use crate::lagrangian::{base_jets, LagrangianDef, MetricSample, TangentPoint};
use crate::linalg;
use crate::tensor::Tensor;

/// Jet orders of `L` sufficient for every tensor and curvature.
pub const DEFAULT_ORDERS: (usize, usize) = (2, 5);
/// Jet orders of `L` needed for derivatives of curvature.
pub const DEEP_ORDERS: (usize, usize) = (3, 6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConnectionKind {
    Berwald,
    Cartan,
    ChernRund,
    Hashiguchi,
    MeanBerwald,
    MeanChernRund,
}

impl ConnectionKind {
    pub const ALL: [ConnectionKind; 6] = [
        ConnectionKind::Berwald,
        ConnectionKind::Cartan,
        ConnectionKind::ChernRund,
        ConnectionKind::Hashiguchi,
        ConnectionKind::MeanBerwald,
        ConnectionKind::MeanChernRund,
    ];

    pub const NOTABLE: [ConnectionKind; 4] =
        [ConnectionKind::Berwald, ConnectionKind::Cartan, ConnectionKind::ChernRund, ConnectionKind::Hashiguchi];

    pub fn name(self) -> &'static str {
        match self {
            ConnectionKind::Berwald => "berwald",
            ConnectionKind::Cartan => "cartan",
            ConnectionKind::ChernRund => "chern-rund",
            ConnectionKind::Hashiguchi => "hashiguchi",
            ConnectionKind::MeanBerwald => "mean-berwald",
            ConnectionKind::MeanChernRund => "mean-chern-rund",
        }
    }

    /// Horizontal coefficients are the Berwald ones (otherwise Chern–Rund).
    pub fn berwald_horizontal(self) -> bool {
        matches!(self, ConnectionKind::Berwald | ConnectionKind::Hashiguchi | ConnectionKind::MeanBerwald)
    }

    fn index(self) -> usize {
        ConnectionKind::ALL.iter().position(|k| *k == self).unwrap_or(0)
    }
}

impl fmt::Display for ConnectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConnectionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ConnectionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown connection kind {s:?}"))
    }
}

/// Variance of a tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Jet-valued horizontal and vertical coefficients of a Finsler connection.
#[derive(Debug, Clone)]
pub struct ConnectionJets {
    pub kind: ConnectionKind,
    /// `H^a_bi`, stored `[a, b, i]` with `i` the direction slot.
    pub h: Tensor<Jet>,
    /// `V^a_bc`, stored `[a, b, c]` with `c` the direction slot.
    pub v: Tensor<Jet>,
}

/// All jet-valued tensors at a point that do not depend on a connection kind.
pub struct PointGeometry {
    pub n: usize,
    pub point: TangentPoint,
    pub orders: (usize, usize),
    layout: Arc<Layout>,
    pub y: Vec<Jet>,
    pub l: Jet,
    pub g: Tensor<Jet>,
    pub g_inv: Tensor<Jet>,
    pub metric: MetricSample,
    /// `sqrt|det g|`, the density of the volume form.
    pub volume: Jet,
    /// Spray coefficients `𝒢^i`.
    pub spray: Tensor<Jet>,
    /// Berwald non-linear connection `𝒢^i_k`, `[i, k]`.
    pub nonlinear: Tensor<Jet>,
    /// `𝒢^i_jk`.
    pub berwald: Tensor<Jet>,
    /// `𝒢^i_jkl`.
    pub berwald_curvature: Tensor<Jet>,
    /// `Γ^i_jk`.
    pub chern: Tensor<Jet>,
    /// `C_ijk`.
    pub cartan: Tensor<Jet>,
    /// `C^i_jk`.
    pub cartan_mixed: Tensor<Jet>,
    /// `I_i`.
    pub mean_cartan: Tensor<Jet>,
    /// `L_ijk = g_il (𝒢^l_jk − Γ^l_jk)`.
    pub landsberg: Tensor<Jet>,
    /// `L^i_jk`.
    pub landsberg_mixed: Tensor<Jet>,
    /// `J_i`.
    pub mean_landsberg: Tensor<Jet>,
    /// `E_ij = ½ 𝒢^l_ijl`.
    pub mean_berwald: Tensor<Jet>,
    /// Non-linear curvature `R^a_ij`, `[a, i, j]`.
    pub curvature: Tensor<Jet>,
}

impl PointGeometry {
    pub fn new(def: &LagrangianDef, p: &TangentPoint) -> Result<Self, GeometryError> {
        Self::with_orders(def, p, DEFAULT_ORDERS)
    }

    pub fn with_orders(def: &LagrangianDef, p: &TangentPoint, orders: (usize, usize)) -> Result<Self, GeometryError> {
        let n = def.dim;
        let b = base_jets(def, p, orders.0, orders.1)?;
        let layout = b.layout.clone();
        let zero = Jet::zero(&layout);
        let g = b.g;
        let g_inv = b.g_inv;
        let y = b.ys;

        let det = linalg::determinant_jet(&g);
        let volume = if det.val() < 0.0 { det.scale(-1.0) } else { det }.apply(ElemFn::Sqrt)?;

        // 𝒢^i = ¼ g^is (2 ∂_j g_sk − ∂_s g_jk) y^j y^k
        let dgx = g.grad_x();
        let a = Tensor::fn1(n, |s| {
            let mut acc = zero.clone();
            for j in 0..n {
                for k in 0..n {
                    let mut t = dgx[[j, s, k]].scale(2.0);
                    t.sub_assign(&dgx[[s, j, k]]);
                    acc.add_mul(1.0, &t, &(&y[j] * &y[k]));
                }
            }
            acc
        });
        let spray = Tensor::fn1(n, |i| {
            let mut acc = zero.clone();
            for s in 0..n {
                acc.add_mul(0.25, &g_inv[[i, s]], &a[[s]]);
            }
            acc
        });
        let nonlinear = Tensor::fn2(n, |i, k| spray[[i]].d_y(k));
        let berwald = symmetrize_last2(&Tensor::fn3(n, |i, j, k| nonlinear[[i, k]].d_y(j)));
        let berwald_curvature = Tensor::fn4(n, |i, j, k, l| berwald[[i, j, k]].d_y(l));

        let delta = |f: &Jet, k: usize| -> Jet {
            let mut r = f.d_x(k);
            for a in 0..n {
                r.add_mul(-1.0, &nonlinear[[a, k]], &f.d_y(a));
            }
            r
        };
        let dg = Tensor::fn3(n, |k, i, j| delta(&g[[i, j]], k));
        let chern_lower = Tensor::fn3(n, |s, j, k| {
            let mut t = &dg[[j, s, k]] + &dg[[k, s, j]];
            t.sub_assign(&dg[[s, j, k]]);
            t.scale(0.5)
        });
        let chern = symmetrize_last2(&raise_first(&g_inv, &chern_lower));

        let cartan = Tensor::fn3(n, |i, j, k| g[[i, j]].d_y(k).scale(0.5));
        let cartan_mixed = raise_first(&g_inv, &cartan);
        let mean_cartan = Tensor::fn1(n, |i| {
            let mut acc = zero.clone();
            for j in 0..n {
                for k in 0..n {
                    acc.add_mul(1.0, &cartan[[i, j, k]], &g_inv[[j, k]]);
                }
            }
            acc
        });
        let landsberg = Tensor::fn3(n, |i, j, k| {
            let mut acc = zero.clone();
            for l in 0..n {
                acc.add_mul(1.0, &g[[i, l]], &(&berwald[[l, j, k]] - &chern[[l, j, k]]));
            }
            acc
        });
        let landsberg_mixed = raise_first(&g_inv, &landsberg);
        let mean_landsberg = Tensor::fn1(n, |i| {
            let mut acc = zero.clone();
            for j in 0..n {
                for k in 0..n {
                    acc.add_mul(1.0, &landsberg[[i, j, k]], &g_inv[[j, k]]);
                }
            }
            acc
        });
        let mean_berwald = Tensor::fn2(n, |i, j| {
            let mut acc = zero.clone();
            for l in 0..n {
                acc.add_assign(&berwald_curvature[[l, i, j, l]]);
            }
            acc.scale(0.5)
        });
        let curvature = Tensor::fn3(n, |a, i, j| delta(&nonlinear[[a, j]], i) - delta(&nonlinear[[a, i]], j));

        Ok(PointGeometry {
            n,
            point: p.clone(),
            orders,
            layout,
            y,
            l: b.l,
            g,
            g_inv,
            metric: b.metric,
            volume,
            spray,
            nonlinear,
            berwald,
            berwald_curvature,
            chern,
            cartan,
            cartan_mixed,
            mean_cartan,
            landsberg,
            landsberg_mixed,
            mean_landsberg,
            mean_berwald,
            curvature,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn zero(&self) -> Jet {
        Jet::zero(&self.layout)
    }

    pub fn constant(&self, v: f64) -> Jet {
        Jet::constant(&self.layout, v)
    }

    /// `δ_k f = ∂_{x^k} f − N^a_k ∂_{y^a} f`.
    pub fn delta(&self, f: &Jet, k: usize) -> Jet {
        let mut r = f.d_x(k);
        for a in 0..self.n {
            r.add_mul(-1.0, &self.nonlinear[[a, k]], &f.d_y(a));
        }
        r
    }

    /// `δ` of every component, derivative index first.
    pub fn delta_t(&self, t: &Tensor<Jet>) -> Tensor<Jet> {
        let dy = t.grad_y();
        Tensor::from_fn(self.n, t.rank() + 1, |idx| {
            let k = idx[0];
            let mut r = t.get(&idx[1..]).d_x(k);
            let mut src = idx.to_vec();
            for a in 0..self.n {
                src[0] = a;
                r.add_mul(-1.0, &self.nonlinear[[a, k]], dy.get(&src));
            }
            r
        })
    }

    /// The connection coefficients of one kind.
    pub fn connection(&self, kind: ConnectionKind) -> ConnectionJets {
        let n = self.n;
        let h = if kind.berwald_horizontal() { self.berwald.clone() } else { self.chern.clone() };
        let v = match kind {
            ConnectionKind::Berwald | ConnectionKind::ChernRund => Tensor::filled(n, 3, self.zero()),
            ConnectionKind::Cartan | ConnectionKind::Hashiguchi => self.cartan_mixed.clone(),
            ConnectionKind::MeanBerwald | ConnectionKind::MeanChernRund => Tensor::fn3(n, |a, b, c| {
                if a == b {
                    self.mean_cartan[[c]].scale(1.0 / n as f64)
                } else {
                    self.zero()
                }
            }),
        };
        ConnectionJets { kind, h, v }
    }

    fn covariant(&self, t: &Tensor<Jet>, slots: &[Slot], coeff: &Tensor<Jet>, base: Tensor<Jet>) -> Tensor<Jet> {
        assert_eq!(slots.len(), t.rank(), "one variance per slot");
        let n = self.n;
        let mut out = base;
        let mut src = vec![0usize; t.rank()];
        for i in 0..n {
            for flat in 0..n.pow(t.rank() as u32) {
                let mut idx = vec![0usize; t.rank()];
                let mut f = flat;
                for s in (0..t.rank()).rev() {
                    idx[s] = f % n;
                    f /= n;
                }
                let mut full = vec![i];
                full.extend_from_slice(&idx);
                let target = out.get_mut(&full);
                for (s, slot) in slots.iter().enumerate() {
                    src.copy_from_slice(&idx);
                    for m in 0..n {
                        src[s] = m;
                        match slot {
                            Slot::Up => target.add_mul(1.0, &coeff[[idx[s], m, i]], t.get(&src)),
                            Slot::Down => target.add_mul(-1.0, &coeff[[m, idx[s], i]], t.get(&src)),
                        }
                    }
                }
            }
        }
        out
    }

    /// `∇^H_i T`, derivative index first.
    pub fn cov_h(&self, t: &Tensor<Jet>, slots: &[Slot], conn: &ConnectionJets) -> Tensor<Jet> {
        self.covariant(t, slots, &conn.h, self.delta_t(t))
    }

    /// `∇^V_i T`, derivative index first.
    pub fn cov_v(&self, t: &Tensor<Jet>, slots: &[Slot], conn: &ConnectionJets) -> Tensor<Jet> {
        self.covariant(t, slots, &conn.v, t.grad_y())
    }

    /// `R^{HH i}_jkl` of a connection.
    pub fn hh_curvature(&self, conn: &ConnectionJets) -> Tensor<Jet> {
        let n = self.n;
        let (h, v) = (&conn.h, &conn.v);
        let dh = self.delta_t(h);
        Tensor::fn4(n, |i, j, k, l| {
            let mut r = &dh[[k, i, j, l]] - &dh[[l, i, j, k]];
            for m in 0..n {
                r.add_mul(1.0, &h[[i, m, k]], &h[[m, j, l]]);
                r.add_mul(-1.0, &h[[i, m, l]], &h[[m, j, k]]);
                r.add_mul(1.0, &self.curvature[[m, k, l]], &v[[i, j, m]]);
            }
            r
        })
    }

    /// `R^{VH i}_jkl` of a connection.
    pub fn vh_curvature(&self, conn: &ConnectionJets) -> Tensor<Jet> {
        let n = self.n;
        let (h, v) = (&conn.h, &conn.v);
        let dv = self.delta_t(v);
        let dh = h.grad_y();
        Tensor::fn4(n, |i, j, k, l| {
            let mut r = &dh[[k, i, j, l]] - &dv[[l, i, j, k]];
            for m in 0..n {
                r.add_mul(-1.0, &h[[i, m, l]], &v[[m, j, k]]);
                r.add_mul(1.0, &v[[i, m, k]], &h[[m, j, l]]);
                r.add_mul(1.0, &v[[i, j, m]], &self.berwald[[m, k, l]]);
            }
            r
        })
    }

    /// `R^{VV i}_jkl` of a connection.
    pub fn vv_curvature(&self, conn: &ConnectionJets) -> Tensor<Jet> {
        let n = self.n;
        let v = &conn.v;
        let dv = v.grad_y();
        Tensor::fn4(n, |i, j, k, l| {
            let mut r = &dv[[k, i, j, l]] - &dv[[l, i, j, k]];
            for m in 0..n {
                r.add_mul(1.0, &v[[i, m, k]], &v[[m, j, l]]);
                r.add_mul(-1.0, &v[[i, m, l]], &v[[m, j, k]]);
            }
            r
        })
    }

    /// Lowers the first index with `g`.
    pub fn lower_first(&self, t: &Tensor<Jet>) -> Tensor<Jet> {
        lower_first(&self.g, t)
    }

    /// Raises the first index with `g^{-1}`.
    pub fn raise_first(&self, t: &Tensor<Jet>) -> Tensor<Jet> {
        raise_first(&self.g_inv, t)
    }
}

fn symmetrize_last2(t: &Tensor<Jet>) -> Tensor<Jet> {
    let n = t.n();
    Tensor::fn3(n, |i, j, k| (&t[[i, j, k]] + &t[[i, k, j]]).scale(0.5))
}

fn contract_first(m: &Tensor<Jet>, t: &Tensor<Jet>) -> Tensor<Jet> {
    let n = t.n();
    Tensor::from_fn(n, t.rank(), |idx| {
        let mut acc = Jet::zero(m[[0, 0]].layout());
        let mut src = idx.to_vec();
        for s in 0..n {
            src[0] = s;
            acc.add_mul(1.0, &m[[idx[0], s]], t.get(&src));
        }
        acc
    })
}

pub(crate) fn raise_first(g_inv: &Tensor<Jet>, t: &Tensor<Jet>) -> Tensor<Jet> {
    contract_first(g_inv, t)
}

pub(crate) fn lower_first(g: &Tensor<Jet>, t: &Tensor<Jet>) -> Tensor<Jet> {
    contract_first(g, t)
}

/// `|det(δ^a_c + V^a_bc y^b)|` for a connection at a point.
pub fn regularity_determinant(geom: &PointGeometry, conn: &ConnectionJets) -> Result<f64, GeometryError> {
    let n = geom.n;
    let yv = &geom.point.y;
    let v = conn.v.value()?;
    let m = Tensor::fn2(n, |a, c| {
        let mut s = if a == c { 1.0 } else { 0.0 };
        for b in 0..n {
            s += v[[a, b, c]] * yv[b];
        }
        s
    });
    Ok(linalg::determinant(&m).abs())
}

impl ConnectionKind {
    pub(crate) fn slot(self) -> usize {
        self.index()
    }
}

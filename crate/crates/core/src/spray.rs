//! Spray, non-linear connection, connection triples and covariant derivatives.

use crate::error::GeometryError;
use crate::expr::Expr;
use crate::geometry::{regularity_determinant, ConnectionKind, PointGeometry, Slot};
use crate::jet::{Jet, JetSpec, Layout};
use crate::lagrangian::{base_jets, lift, LagrangianDef, TangentPoint};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct SpraySample {
    /// `𝒢^i`.
    pub g0: Tensor<f64>,
    /// `𝒢^i_k`.
    pub g1: Tensor<f64>,
    /// `𝒢^i_jk`.
    pub g2: Tensor<f64>,
    /// `𝒢^i_jkl`.
    pub g3: Tensor<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTriple {
    pub kind: ConnectionKind,
    pub n: Tensor<f64>,
    pub h: Tensor<f64>,
    pub v: Tensor<f64>,
    pub regular_det: f64,
}

/// Fields accepted by [`covariant_deriv`].
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Metric,
    InverseMetric,
    Cartan,
    MeanCartan,
    Landsberg,
    /// The density `sqrt|det g|` of the volume form.
    Volume,
    /// A user scalar function of `(x, y)`.
    Scalar(Expr),
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "g" => Field::Metric,
            "g_inv" => Field::InverseMetric,
            "C" => Field::Cartan,
            "I" => Field::MeanCartan,
            "L" => Field::Landsberg,
            "mu" => Field::Volume,
            _ => return Err(format!("unknown field {s:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
    Vertical,
}

pub fn spray(def: &LagrangianDef, p: &TangentPoint) -> Result<SpraySample, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    Ok(SpraySample {
        g0: geo.spray.value()?,
        g1: geo.nonlinear.value()?,
        g2: geo.berwald.value()?,
        g3: geo.berwald_curvature.value()?,
    })
}

/// `𝒢^i` alone, from the lowest jets that determine it. Used on hot paths
/// such as ODE right-hand sides.
pub fn spray_value(def: &LagrangianDef, p: &TangentPoint) -> Result<Tensor<f64>, GeometryError> {
    Ok(spray_jets(def, p, 2)?.value()?)
}

/// `𝒢^i_k(x, y)` alone, see [`spray_value`].
pub fn nonlinear_value(def: &LagrangianDef, p: &TangentPoint) -> Result<Tensor<f64>, GeometryError> {
    let g = spray_jets(def, p, 3)?;
    Ok(Tensor::fn2(def.dim, |i, k| g[[i]].d_y(k)).value()?)
}

// 2𝒢^i = g^is (y^k ∂²L/∂x^k∂y^s − ∂L/∂x^s).
fn spray_jets(def: &LagrangianDef, p: &TangentPoint, order_y: usize) -> Result<Tensor<Jet>, GeometryError> {
    let b = base_jets(def, p, 1, order_y)?;
    let n = def.dim;
    let lx: Vec<Jet> = (0..n).map(|s| b.l.d_x(s)).collect();
    let w: Vec<Jet> = (0..n)
        .map(|s| {
            let mut acc = lx[s].scale(-1.0);
            for k in 0..n {
                acc.add_mul(1.0, &lx[k].d_y(s), &b.ys[k]);
            }
            acc
        })
        .collect();
    Ok(Tensor::fn1(n, |i| {
        let mut acc = Jet::zero(&b.layout);
        for s in 0..n {
            acc.add_mul(0.5, &b.g_inv[[i, s]], &w[s]);
        }
        acc
    }))
}

pub fn nonlinear_connection(def: &LagrangianDef, p: &TangentPoint) -> Result<Tensor<f64>, GeometryError> {
    Ok(PointGeometry::new(def, p)?.nonlinear.value()?)
}

pub fn gamma_coeffs(def: &LagrangianDef, p: &TangentPoint) -> Result<Tensor<f64>, GeometryError> {
    Ok(PointGeometry::new(def, p)?.chern.value()?)
}

pub fn triple_from(geo: &PointGeometry, kind: ConnectionKind) -> Result<ConnectionTriple, GeometryError> {
    let conn = geo.connection(kind);
    let regular_det = regularity_determinant(geo, &conn)?;
    if !(regular_det > 0.0) {
        return Err(GeometryError::Domain(format!("{kind} connection is not regular at this point")));
    }
    Ok(ConnectionTriple { kind, n: geo.nonlinear.value()?, h: conn.h.value()?, v: conn.v.value()?, regular_det })
}

pub fn connection_triple(def: &LagrangianDef, p: &TangentPoint, kind: ConnectionKind) -> Result<ConnectionTriple, GeometryError> {
    triple_from(&PointGeometry::new(def, p)?, kind)
}

/// Jet-valued field and its slot variances.
pub fn field_jets(geo: &PointGeometry, field: &Field) -> Result<(Tensor<Jet>, Vec<Slot>), GeometryError> {
    use Slot::*;
    Ok(match field {
        Field::Metric => (geo.g.clone(), vec![Down, Down]),
        Field::InverseMetric => (geo.g_inv.clone(), vec![Up, Up]),
        Field::Cartan => (geo.cartan.clone(), vec![Down, Down, Down]),
        Field::MeanCartan => (geo.mean_cartan.clone(), vec![Down]),
        Field::Landsberg => (geo.landsberg.clone(), vec![Down, Down, Down]),
        Field::Volume => (volume_form(geo), vec![Down; geo.n]),
        Field::Scalar(e) => {
            let (xs, ys) = lift(geo.layout(), &geo.point);
            (Tensor::from_vec(geo.n, 0, vec![e.eval_jet(geo.layout(), &xs, &ys)?]), vec![])
        }
    })
}

/// Components `μ_{i1..in} = sqrt|det g| ε_{i1..in}` of the volume form.
pub fn volume_form(geo: &PointGeometry) -> Tensor<Jet> {
    let n = geo.n;
    Tensor::from_fn(n, n, |idx| {
        let s = levi_civita(idx);
        if s == 0.0 {
            geo.zero()
        } else {
            geo.volume.scale(s)
        }
    })
}

pub fn levi_civita(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `∇^H` or `∇^V` of a built-in field, derivative index first.
pub fn covariant_deriv(
    def: &LagrangianDef,
    p: &TangentPoint,
    kind: ConnectionKind,
    field: &Field,
    direction: Direction,
) -> Result<Tensor<f64>, GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    let conn = geo.connection(kind);
    let (t, slots) = field_jets(&geo, field)?;
    let d = match direction {
        Direction::Horizontal => geo.cov_h(&t, &slots, &conn),
        Direction::Vertical => geo.cov_v(&t, &slots, &conn),
    };
    Ok(d.value()?)
}

/// Torsion `τ^i_jk = ∂_{y^k} N^i_j − ∂_{y^j} N^i_k` of a jet-valued non-linear connection.
pub fn torsion_of(n_jets: &Tensor<Jet>) -> Tensor<Jet> {
    let n = n_jets.n();
    Tensor::fn3(n, |i, j, k| &n_jets[[i, j]].d_y(k) - &n_jets[[i, k]].d_y(j))
}

/// `N^i_k = 𝒢^i_k − ½ τ^i_jk y^j`: a homogeneous non-linear connection from its spray and torsion.
pub fn reconstruct_connection(
    p: &TangentPoint,
    spray: &SpraySample,
    torsion: &Tensor<f64>,
) -> Result<Tensor<f64>, GeometryError> {
    let n = spray.g0.n();
    if torsion.rank() != 3 || torsion.n() != n {
        return Err(GeometryError::Dimension("torsion must be an n×n×n array".into()));
    }
    let scale = 1.0 + torsion.max_abs();
    let asym = torsion.plus(&torsion.permute(&[0, 2, 1])).max_abs();
    if asym > 1e-12 * scale {
        return Err(GeometryError::InvalidArgument(format!(
            "torsion is not antisymmetric in its lower indices (defect {asym:.3e})"
        )));
    }
    Ok(Tensor::fn2(n, |i, k| {
        let mut s = spray.g1[[i, k]];
        for j in 0..n {
            s -= 0.5 * torsion[[i, j, k]] * p.y[j];
        }
        s
    }))
}

/// `^flip D_ξ s^a = ∂_k s^a ξ^k + N^a_k(x, ξ) s^k` for a vector field `s(x)`.
pub fn flip_derivative(
    def: &LagrangianDef,
    x: &[f64],
    section: &[Expr],
    xi: &[f64],
) -> Result<Tensor<f64>, GeometryError> {
    let n = def.dim;
    if section.len() != n || xi.len() != n || x.len() != n {
        return Err(GeometryError::Dimension("section, point and direction must have length n".into()));
    }
    if section.iter().any(|e| e.uses_y()) {
        return Err(GeometryError::InvalidArgument("section must depend on x only".into()));
    }
    let p = TangentPoint::new(x.to_vec(), xi.to_vec());
    let nl = nonlinear_connection(def, &p)?;
    let layout = Layout::get(JetSpec::new(n, 0, 1, 0));
    let xs: Vec<Jet> = x.iter().enumerate().map(|(i, &v)| Jet::var_x(&layout, i, v)).collect();
    let mut out = Vec::with_capacity(n);
    let sv: Vec<Jet> = section.iter().map(|e| e.eval_jet(&layout, &xs, &[])).collect::<Result<_, _>>()?;
    for a in 0..n {
        let mut r = 0.0;
        for k in 0..n {
            r += sv[a].d_x(k).value()? * xi[k] + nl[[a, k]] * sv[k].value()?;
        }
        out.push(r);
    }
    Ok(Tensor::from_vec(n, 1, out))
}

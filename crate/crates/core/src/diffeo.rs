//! A fixed non-linear change of coordinates and the transformation laws of the
//! spray and the non-linear connection under it.
//!
//! In dimension ≥ 2 the map is `x̃^0 = x^0 + c (x^1)^2`, other coordinates
//! unchanged. In dimension 1 it is `x̃^0 = x^0 + c (x^0)^2`, used on `x^0 > −1/(2c)`.

use crate::error::GeometryError;
use crate::expr::{Expr, Func};
use crate::lagrangian::{Body, LagrangianDef, TangentPoint};
use crate::spray::{spray, SpraySample};
use crate::tensor::{sum, Tensor};

const C: f64 = 0.1;

/// Forward map `x ↦ x̃`.
pub fn forward(x: &[f64]) -> Vec<f64> {
    let mut t = x.to_vec();
    if x.len() >= 2 {
        t[0] += C * x[1] * x[1];
    } else {
        t[0] += C * x[0] * x[0];
    }
    t
}

/// Jacobian `M^a_b = ∂x̃^a/∂x^b`.
pub fn jacobian(x: &[f64]) -> Tensor<f64> {
    let n = x.len();
    Tensor::fn2(n, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        match (a, b, n) {
            (0, 0, 1) => 1.0 + 2.0 * C * x[0],
            (0, 1, _) => 2.0 * C * x[1],
            _ => id,
        }
    })
}

/// Second derivatives `M^a_{b,k} = ∂²x̃^a/∂x^b∂x^k`.
pub fn hessian(x: &[f64]) -> Tensor<f64> {
    let n = x.len();
    let pivot = if n >= 2 { 1 } else { 0 };
    Tensor::fn3(n, |a, b, k| if a == 0 && b == pivot && k == pivot { 2.0 * C } else { 0.0 })
}

/// The tangent point `(x̃, M y)`.
pub fn push_point(p: &TangentPoint) -> TangentPoint {
    let m = jacobian(&p.x);
    let n = p.x.len();
    let y = (0..n).map(|a| sum(n, |b| m[[a, b]] * p.y[b])).collect();
    TangentPoint::new(forward(&p.x), y)
}

/// The same Lagrangian written in the coordinates `x̃`: `L̃(x̃, ỹ) = L(x(x̃), ∂x/∂x̃ ỹ)`.
pub fn transformed(def: &LagrangianDef) -> LagrangianDef {
    let n = def.dim;
    let num = Expr::Num;
    let (xs, ys): (Vec<Expr>, Vec<Expr>) = if n >= 2 {
        let mut xs: Vec<Expr> = (0..n).map(Expr::X).collect();
        xs[0] = Expr::sub(Expr::X(0), Expr::mul(num(C), Expr::mul(Expr::X(1), Expr::X(1))));
        let mut ys: Vec<Expr> = (0..n).map(Expr::Y).collect();
        ys[0] = Expr::sub(Expr::Y(0), Expr::mul(num(2.0 * C), Expr::mul(Expr::X(1), Expr::Y(1))));
        (xs, ys)
    } else {
        // x = (sqrt(1 + 4c x̃) − 1) / 2c and dx/dx̃ = 1 / sqrt(1 + 4c x̃).
        let root = Expr::call(Func::Sqrt, Expr::add(num(1.0), Expr::mul(num(4.0 * C), Expr::X(0))));
        let x0 = Expr::div(Expr::sub(root.clone(), num(1.0)), num(2.0 * C));
        (vec![x0], vec![Expr::div(Expr::Y(0), root)])
    };
    let lagrangian = def.lagrangian.substitute_x(&xs).substitute_y(&ys);
    LagrangianDef {
        dim: n,
        name: def.name.as_ref().map(|s| format!("{s} (transformed)")),
        params: def.params.clone(),
        source: format!("L: {lagrangian}"),
        lagrangian,
        body: Body::General,
        options: def.options,
    }
}

/// Spray and non-linear connection predicted by the transformation laws at `x̃`.
pub struct CocyclePrediction {
    pub spray: Tensor<f64>,
    pub nonlinear: Tensor<f64>,
}

/// `G̃^i = M^i_j G^j − ½ M^i_{j,k} y^j y^k` and
/// `Ñ^a_j = (M^a_b N^b_k − M^a_{b,k} y^b) ∂x^k/∂x̃^j`.
pub fn predict(p: &TangentPoint, s: &SpraySample) -> Result<CocyclePrediction, GeometryError> {
    let n = p.x.len();
    let m = jacobian(&p.x);
    let mm = hessian(&p.x);
    let minv = crate::linalg::inverse(&m).ok_or_else(|| GeometryError::Domain("singular Jacobian".into()))?;
    let y = &p.y;
    let spray = Tensor::fn1(n, |i| {
        sum(n, |j| m[[i, j]] * s.g0[[j]]) - 0.5 * sum(n, |j| sum(n, |k| mm[[i, j, k]] * y[j] * y[k]))
    });
    let inner = Tensor::fn2(n, |a, k| sum(n, |b| m[[a, b]] * s.g1[[b, k]] - mm[[a, b, k]] * y[b]));
    let nonlinear = Tensor::fn2(n, |a, j| sum(n, |k| inner[[a, k]] * minv[[k, j]]));
    Ok(CocyclePrediction { spray, nonlinear })
}

/// Computed and predicted `(G̃, Ñ)` at the image of `p`, as `(computed, predicted)`.
pub fn cocycle_pair(
    def: &LagrangianDef,
    tdef: &LagrangianDef,
    p: &TangentPoint,
) -> Result<(SpraySample, CocyclePrediction), GeometryError> {
    let s = spray(def, p)?;
    let pred = predict(p, &s)?;
    let computed = spray(tdef, &push_point(p))?;
    Ok((computed, pred))
}

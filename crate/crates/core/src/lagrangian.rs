//! Definition files, Lagrangian evaluation, fundamental and Cartan tensors.

use std::sync::Arc;

use crate::error::{GeometryError, ParseError};
use crate::expr::{parse_expr, Expr, ExprError, Func, Names, StdNames};
use crate::jet::{Jet, JetSpec, Layout};
use crate::linalg;
use crate::tensor::Tensor;

/// Pointwise guards applied before any tensor is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Smallest admissible Euclidean norm of `y`.
    pub y_min: f64,
    /// Largest admissible condition number of `g`.
    pub cond_max: f64,
    /// Relative tolerance of the Euler homogeneity check, `None` to skip it.
    pub homogeneity_tol: Option<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { y_min: 1e-6, cond_max: 1e8, homogeneity_tol: Some(1e-6) }
    }
}

/// How the Lagrangian was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// An arbitrary expression in `x` and `y`.
    General,
    /// `L = ½ a_ij(x) y^i y^j`, entries row-major.
    Riemannian { a: Vec<Expr> },
    /// `L = ½ (sqrt(a_ij y^i y^j) + b_i y^i)^2`.
    Randers { a: Vec<Expr>, b: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDef {
    pub dim: usize,
    pub name: Option<String>,
    pub params: Vec<(String, f64)>,
    /// Source text of the body line.
    pub source: String,
    pub lagrangian: Expr,
    pub body: Body,
    pub options: EvalOptions,
}

pub const MAX_DIM: usize = 4;

/// A tangent vector `y` at a point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        TangentPoint { x, y }
    }

    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Fundamental tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub g: Tensor<f64>,
    pub g_inv: Tensor<f64>,
    /// Counts of positive and negative eigenvalues.
    pub signature: (usize, usize),
    pub det: f64,
    pub cond: f64,
}

/// Cartan tensor, its mixed form and the mean Cartan torsion by two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanSample {
    pub lower: Tensor<f64>,
    pub mixed: Tensor<f64>,
    /// `C_ijk g^jk`.
    pub mean: Tensor<f64>,
    /// `∂_{y^i} log sqrt|det g|`.
    pub mean_from_volume: Tensor<f64>,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn expr_err(line: usize, offset: usize, e: ExprError) -> ParseError {
    perr(line, offset + e.column, e.message)
}

// splits at `sep` outside brackets and parentheses, returning (piece, char offset)
fn split_top(s: &str, seps: &[char]) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut start = 0;
    for (i, c) in s.chars().enumerate() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if depth == 0 && seps.contains(&c) {
            out.push((std::mem::take(&mut cur), start));
            start = i + 1;
        } else {
            cur.push(c);
        }
    }
    out.push((cur, start));
    out
}

// trims whitespace, returning the new offset into the original
fn trim_at(s: &str, offset: usize) -> (&str, usize) {
    let lead = s.chars().take_while(|c| c.is_whitespace()).count();
    let t = s.trim();
    (t, offset + lead)
}

fn strip_brackets(s: &str, offset: usize, line: usize) -> Result<(&str, usize), ParseError> {
    let (t, off) = trim_at(s, offset);
    if let Some(inner) = t.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| perr(line, off + t.chars().count(), "expected ']'"))?;
        Ok((inner, off + 1))
    } else {
        Ok((t, off))
    }
}

struct XOnly<'a>(StdNames<'a>);

impl Names for XOnly<'_> {
    fn resolve(&self, name: &str) -> Option<Expr> {
        match self.0.resolve(name) {
            Some(Expr::Y(_)) => None,
            other => other,
        }
    }
}

fn parse_entries(
    s: &str,
    offset: usize,
    line: usize,
    names: &dyn Names,
    rows: Option<usize>,
    cols: usize,
) -> Result<Vec<Expr>, ParseError> {
    let (inner, off) = strip_brackets(s, offset, line)?;
    let row_parts = split_top(inner, &[';']);
    let row_parts: Vec<_> = if row_parts.len() > 1 && row_parts.last().is_some_and(|(r, _)| r.trim().is_empty()) {
        row_parts[..row_parts.len() - 1].to_vec()
    } else {
        row_parts
    };
    if let Some(r) = rows {
        if row_parts.len() != r {
            return Err(perr(line, off + 1, format!("expected {r} rows, found {}", row_parts.len())));
        }
    } else if row_parts.len() != 1 {
        return Err(perr(line, off + 1, "expected a single row"));
    }
    let mut out = Vec::new();
    for (row, roff) in row_parts {
        let items = split_top(&row, &[',']);
        if items.len() != cols {
            return Err(perr(line, off + roff + 1, format!("expected {cols} entries, found {}", items.len())));
        }
        for (item, ioff) in items {
            let (t, o) = trim_at(&item, off + roff + ioff);
            if t.is_empty() {
                return Err(perr(line, o + 1, "empty entry"));
            }
            out.push(parse_expr(t, names).map_err(|e| expr_err(line, o, e))?);
        }
    }
    Ok(out)
}

fn quadratic_form(a: &[Expr], n: usize) -> Expr {
    let mut acc: Option<Expr> = None;
    for i in 0..n {
        for j in 0..n {
            let t = Expr::mul(a[i * n + j].clone(), Expr::mul(Expr::Y(i), Expr::Y(j)));
            acc = Some(match acc {
                None => t,
                Some(s) => Expr::add(s, t),
            });
        }
    }
    acc.unwrap_or(Expr::Num(0.0))
}

fn linear_form(b: &[Expr]) -> Expr {
    let mut acc: Option<Expr> = None;
    for (i, bi) in b.iter().enumerate() {
        let t = Expr::mul(bi.clone(), Expr::Y(i));
        acc = Some(match acc {
            None => t,
            Some(s) => Expr::add(s, t),
        });
    }
    acc.unwrap_or(Expr::Num(0.0))
}

impl LagrangianDef {
    /// Parses a definition file.
    pub fn parse(text: &str) -> Result<LagrangianDef, ParseError> {
        let mut dim: Option<usize> = None;
        let mut name = None;
        let mut params: Vec<(String, f64)> = Vec::new();
        let mut body_line: Option<(usize, String, String, usize)> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let (t, lead) = trim_at(content, 0);
            let (key, rest, rest_off) = if let Some(r) = t.strip_prefix("param ") {
                ("param", r, lead + 6)
            } else if let Some(pos) = t.find(':') {
                let key = &t[..pos];
                (key.trim(), &t[pos + 1..], lead + t[..pos + 1].chars().count())
            } else {
                return Err(perr(line_no, lead + 1, format!("unrecognized line {t:?}")));
            };
            match key {
                "dim" => {
                    if dim.is_some() {
                        return Err(perr(line_no, lead + 1, "duplicate dim"));
                    }
                    let (v, o) = trim_at(rest, rest_off);
                    let d: usize = v.parse().map_err(|_| perr(line_no, o + 1, format!("invalid dimension {v:?}")))?;
                    if d == 0 || d > MAX_DIM {
                        return Err(perr(line_no, o + 1, format!("dimension must be between 1 and {MAX_DIM}")));
                    }
                    dim = Some(d);
                }
                "name" => name = Some(rest.trim().to_string()),
                "param" => {
                    let Some(eq) = rest.find('=') else {
                        return Err(perr(line_no, rest_off + 1, "expected 'param <name> = <value>'"));
                    };
                    let pname = rest[..eq].trim();
                    let valid = pname.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                        && pname.chars().all(|c| c.is_alphanumeric() || c == '_');
                    if !valid {
                        return Err(perr(line_no, rest_off + 1, format!("invalid parameter name {pname:?}")));
                    }
                    let probe = StdNames { dim: MAX_DIM, params: &[] };
                    if probe.resolve(pname).is_some() || params.iter().any(|(p, _)| p == pname) {
                        return Err(perr(line_no, rest_off + 1, format!("parameter {pname:?} shadows an existing name")));
                    }
                    let voff = rest_off + rest[..eq + 1].chars().count();
                    let (vs, vo) = trim_at(&rest[eq + 1..], voff);
                    let names = StdNames { dim: 0, params: &params };
                    let e = parse_expr(vs, &names).map_err(|e| expr_err(line_no, vo, e))?;
                    let v = e
                        .eval_f64(&[], &[])
                        .map_err(|err| perr(line_no, vo + 1, format!("parameter value: {err}")))?;
                    params.push((pname.to_string(), v));
                }
                "L" | "riemannian" | "randers" => {
                    if body_line.is_some() {
                        return Err(perr(line_no, lead + 1, "more than one Lagrangian body"));
                    }
                    body_line = Some((line_no, key.to_string(), rest.to_string(), rest_off));
                }
                other => return Err(perr(line_no, lead + 1, format!("unknown key {other:?}"))),
            }
        }
        let dim = dim.ok_or_else(|| perr(1, 1, "missing 'dim:' line"))?;
        let (line_no, key, rest, off) = body_line.ok_or_else(|| perr(text.lines().count().max(1), 1, "missing Lagrangian body"))?;
        let names = StdNames { dim, params: &params };
        let xonly = XOnly(StdNames { dim, params: &params });
        let (src, so) = trim_at(&rest, off);
        let (lagrangian, body) = match key.as_str() {
            "L" => {
                if src.is_empty() {
                    return Err(perr(line_no, so + 1, "empty expression"));
                }
                (parse_expr(src, &names).map_err(|e| expr_err(line_no, so, e))?, Body::General)
            }
            "riemannian" => {
                let a = parse_entries(src, so, line_no, &xonly, Some(dim), dim)?;
                (Expr::mul(Expr::Num(0.5), quadratic_form(&a, dim)), Body::Riemannian { a })
            }
            _ => {
                let mut a = None;
                let mut b = None;
                for (part, poff) in split_top(src, &[';']) {
                    let (p, po) = trim_at(&part, so + poff);
                    if p.is_empty() {
                        continue;
                    }
                    let Some(eq) = p.find('=') else {
                        return Err(perr(line_no, po + 1, "expected 'a = [...]' or 'b = [...]'"));
                    };
                    let lhs = p[..eq].trim();
                    let voff = po + p[..eq + 1].chars().count();
                    match lhs {
                        "a" if a.is_none() => a = Some(parse_entries(&p[eq + 1..], voff, line_no, &xonly, Some(dim), dim)?),
                        "b" if b.is_none() => b = Some(parse_entries(&p[eq + 1..], voff, line_no, &xonly, None, dim)?),
                        _ => return Err(perr(line_no, po + 1, format!("unexpected Randers component {lhs:?}"))),
                    }
                }
                let a = a.ok_or_else(|| perr(line_no, so + 1, "Randers body needs 'a'"))?;
                let b = b.ok_or_else(|| perr(line_no, so + 1, "Randers body needs 'b'"))?;
                let root = Expr::call(Func::Sqrt, quadratic_form(&a, dim));
                let f = Expr::add(root, linear_form(&b));
                let l = Expr::mul(Expr::Num(0.5), Expr::pow(f, Expr::Num(2.0)));
                (l, Body::Randers { a, b })
            }
        };
        let def = LagrangianDef {
            dim,
            name,
            params,
            source: format!("{key}: {src}"),
            lagrangian,
            body,
            options: EvalOptions::default(),
        };
        if let Body::Randers { a, b } = &def.body {
            if a.iter().chain(b.iter()).all(|e| e.is_constant()) {
                def.check_randers(&vec![0.0; dim]).map_err(|e| perr(line_no, so + 1, e.to_string()))?;
            }
        }
        Ok(def)
    }

    /// Builds a definition from a single `L` expression.
    pub fn from_expr(dim: usize, expr: &str) -> Result<LagrangianDef, ParseError> {
        LagrangianDef::parse(&format!("dim: {dim}\nL: {expr}\n"))
    }

    pub fn with_options(mut self, options: EvalOptions) -> Self {
        self.options = options;
        self
    }

    fn check_randers(&self, x: &[f64]) -> Result<(), GeometryError> {
        let Body::Randers { a, b } = &self.body else { return Ok(()) };
        let n = self.dim;
        let av = Tensor::fn2(n, |i, j| a[i * n + j].eval_f64(x, &[]));
        let av = av.try_map(|r| r.clone())?;
        let bv: Vec<f64> = b.iter().map(|e| e.eval_f64(x, &[])).collect::<Result<_, _>>()?;
        let ev = linalg::symmetric_eigenvalues(&av);
        if ev[0] <= 0.0 {
            return Err(GeometryError::Domain("Randers metric a is not positive definite".into()));
        }
        let inv = linalg::inverse(&av).ok_or_else(|| GeometryError::Domain("Randers metric a is singular".into()))?;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += inv[[i, j]] * bv[i] * bv[j];
            }
        }
        let norm = q.max(0.0).sqrt();
        if norm >= 1.0 {
            return Err(GeometryError::RandersNorm { norm });
        }
        Ok(())
    }

    /// Validates dimensions, finiteness, the direction norm and Randers data.
    pub fn check_point(&self, p: &TangentPoint) -> Result<(), GeometryError> {
        if p.x.len() != self.dim || p.y.len() != self.dim {
            return Err(GeometryError::Dimension(format!(
                "point has dimensions ({}, {}), definition has {}",
                p.x.len(),
                p.y.len(),
                self.dim
            )));
        }
        if !p.x.iter().chain(&p.y).all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidArgument("non-finite coordinate".into()));
        }
        let norm = p.y_norm();
        if norm < self.options.y_min {
            return Err(GeometryError::SmallDirection { norm });
        }
        self.check_randers(&p.x)
    }
}

/// `L(x, y)` in real arithmetic.
pub fn eval_l(def: &LagrangianDef, p: &TangentPoint) -> Result<f64, GeometryError> {
    def.check_point(p)?;
    def.lagrangian.eval_f64(&p.x, &p.y)
}

/// Jet of `L` at `p` with the given truncation orders.
pub fn jet_l(def: &LagrangianDef, p: &TangentPoint, order_x: usize, order_y: usize) -> Result<Jet, GeometryError> {
    def.check_point(p)?;
    let layout = Layout::get(JetSpec::new(def.dim, def.dim, order_x, order_y));
    let (xs, ys) = lift(&layout, p);
    def.lagrangian.eval_jet(&layout, &xs, &ys)
}

pub(crate) fn lift(layout: &Arc<Layout>, p: &TangentPoint) -> (Vec<Jet>, Vec<Jet>) {
    let xs = p.x.iter().enumerate().map(|(i, &v)| Jet::var_x(layout, i, v)).collect();
    let ys = p.y.iter().enumerate().map(|(i, &v)| Jet::var_y(layout, i, v)).collect();
    (xs, ys)
}

fn euler_residual_from(l: &Jet, y: &[f64]) -> Result<f64, GeometryError> {
    let l0 = l.value()?;
    let mut ydl = 0.0;
    let mut scale = 2.0 * l0.abs();
    for (k, yk) in y.iter().enumerate() {
        let t = yk * l.d_y(k).value()?;
        ydl += t;
        scale += t.abs();
    }
    let defect = (ydl - 2.0 * l0).abs();
    Ok(if scale > 0.0 { defect / scale } else { defect })
}

/// Relative residual of `y^i ∂_{y^i} L = 2 L`, as used by the homogeneity guard.
pub fn homogeneity_residual(def: &LagrangianDef, p: &TangentPoint) -> Result<f64, GeometryError> {
    let l = jet_l(def, p, 0, 1)?;
    euler_residual_from(&l, &p.y)
}

/// Absolute Euler defects `(|y^i ∂L/∂y^i − 2L|, max_jk |y^s ∂g_jk/∂y^s|)`.
///
/// Both vanish for a positively 2-homogeneous `L`.
pub fn euler_check(def: &LagrangianDef, p: &TangentPoint) -> Result<(f64, f64), GeometryError> {
    let l = jet_l(def, p, 0, 3)?;
    let n = def.dim;
    let dl: Vec<Jet> = (0..n).map(|k| l.d_y(k)).collect();
    let mut ydl = 0.0;
    for (k, yk) in p.y.iter().enumerate() {
        ydl += yk * dl[k].value()?;
    }
    let first = (ydl - 2.0 * l.value()?).abs();
    let mut second = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let g = dl[j].d_y(k);
            let mut s = 0.0;
            for (m, ym) in p.y.iter().enumerate() {
                s += ym * g.d_y(m).value()?;
            }
            second = second.max(s.abs());
        }
    }
    Ok((first, second))
}

/// Jets shared by every downstream computation. Orders refer to the jet of `L`.
pub(crate) struct BaseJets {
    pub layout: Arc<Layout>,
    pub ys: Vec<Jet>,
    pub l: Jet,
    pub g: Tensor<Jet>,
    pub g_inv: Tensor<Jet>,
    pub metric: MetricSample,
}

pub(crate) fn base_jets(def: &LagrangianDef, p: &TangentPoint, order_x: usize, order_y: usize) -> Result<BaseJets, GeometryError> {
    def.check_point(p)?;
    let n = def.dim;
    let layout = Layout::get(JetSpec::new(n, n, order_x, order_y));
    let (xs, ys) = lift(&layout, p);
    let l = def.lagrangian.eval_jet(&layout, &xs, &ys)?;
    if let Some(tol) = def.options.homogeneity_tol {
        let residual = euler_residual_from(&l, &p.y)?;
        if residual > tol {
            return Err(GeometryError::Homogeneity { residual });
        }
    }
    let dl: Vec<Jet> = (0..n).map(|i| l.d_y(i)).collect();
    let mut g = Tensor::fn2(n, |i, j| dl[i].d_y(j));
    for i in 0..n {
        for j in 0..i {
            let s = (&g[[i, j]] + &g[[j, i]]).scale(0.5);
            g[[i, j]] = s.clone();
            g[[j, i]] = s;
        }
    }
    let g0 = g.value()?;
    let metric = metric_from_value(&g0, def.options.cond_max)?;
    let g_inv = linalg::inverse_jet(&g, &metric.g_inv);
    Ok(BaseJets { layout, ys, l, g, g_inv, metric })
}

fn metric_from_value(g0: &Tensor<f64>, cond_max: f64) -> Result<MetricSample, GeometryError> {
    if !g0.is_finite() {
        return Err(GeometryError::Domain("fundamental tensor is not finite".into()));
    }
    let cond = linalg::symmetric_condition(g0);
    if !(cond <= cond_max) {
        return Err(GeometryError::Degenerate { cond });
    }
    let g_inv = linalg::inverse(g0).ok_or(GeometryError::Degenerate { cond: f64::INFINITY })?;
    let ev = linalg::symmetric_eigenvalues(g0);
    let pos = ev.iter().filter(|v| **v > 0.0).count();
    let neg = ev.iter().filter(|v| **v < 0.0).count();
    Ok(MetricSample { g: g0.clone(), g_inv, signature: (pos, neg), det: linalg::determinant(g0), cond })
}

/// Fundamental tensor `g_ij = ∂²L/∂y^i∂y^j` with inverse, signature and conditioning.
pub fn metric(def: &LagrangianDef, p: &TangentPoint) -> Result<MetricSample, GeometryError> {
    let b = base_jets(def, p, 0, 2)?;
    Ok(b.metric)
}

/// Cartan tensor `C_ijk = ½ ∂_k g_ij` and the mean Cartan torsion.
pub fn cartan(def: &LagrangianDef, p: &TangentPoint) -> Result<CartanSample, GeometryError> {
    let b = base_jets(def, p, 0, 3)?;
    let n = def.dim;
    let lower = Tensor::fn3(n, |i, j, k| b.g[[i, j]].d_y(k).scale(0.5)).value()?;
    let gi = &b.metric.g_inv;
    let mixed = Tensor::fn3(n, |i, j, k| (0..n).map(|s| gi[[i, s]] * lower[[s, j, k]]).sum());
    let mean = Tensor::fn1(n, |i| {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += lower[[i, j, k]] * gi[[j, k]];
            }
        }
        s
    });
    let det = linalg::determinant_jet(&b.g);
    let sign = if det.val() < 0.0 { -1.0 } else { 1.0 };
    let log_vol = det.scale(sign).apply(crate::jet::ElemFn::Log)?.scale(0.5);
    let mean_from_volume = Tensor::fn1(n, |i| log_vol.d_y(i).val());
    Ok(CartanSample { lower, mixed, mean, mean_from_volume })
}

//! Truncated multivariate Taylor jets over the tangent bundle coordinates.
//!
//! A jet stores Taylor coefficients `d^{α,β} f / (α! β!)` for all multi-indices
//! `|α| <= order_x` over the position variables and `|β| <= order_y` over the
//! direction variables. Differentiation consumes order, so every jet carries the
//! orders up to which its coefficients are still exact.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::JetError;

/// Shape of a jet: variable counts and truncation orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetSpec {
    pub n_x: usize,
    pub n_y: usize,
    pub order_x: usize,
    pub order_y: usize,
}

impl JetSpec {
    pub fn new(n_x: usize, n_y: usize, order_x: usize, order_y: usize) -> Self {
        JetSpec { n_x, n_y, order_x, order_y }
    }
}

/// Monomials of total degree `<= order` in `n` variables, sorted by degree.
#[derive(Debug)]
struct Lattice {
    monos: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    // shift[m][k] = index of monos[m] + e_k, if inside the lattice
    shift: Vec<Vec<Option<usize>>>,
    // count[d] = number of monomials with degree <= d
    count: Vec<usize>,
    // (a, b, c) with monos[a] + monos[b] = monos[c], sorted by degree of c
    triples: Vec<(u32, u32, u32)>,
    // triple_end[d] = number of triples whose product has degree <= d
    triple_end: Vec<usize>,
    factorial: Vec<f64>,
}

impl Lattice {
    fn new(n: usize, order: usize) -> Self {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; n];
            enumerate(n, d, 0, &mut cur, &mut monos);
        }
        let degree: Vec<usize> = monos.iter().map(|m| m.iter().map(|&a| a as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let shift = monos
            .iter()
            .map(|m| {
                (0..n)
                    .map(|k| {
                        let mut s = m.clone();
                        s[k] += 1;
                        index.get(&s).copied()
                    })
                    .collect()
            })
            .collect();
        let count = (0..=order).map(|d| degree.iter().filter(|&&x| x <= d).count()).collect();
        let mut triples = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                if degree[a] + degree[b] > order {
                    continue;
                }
                let sum: Vec<u8> = ma.iter().zip(mb).map(|(p, q)| p + q).collect();
                let c = index[&sum];
                triples.push((a as u32, b as u32, c as u32));
            }
        }
        triples.sort_by_key(|&(_, _, c)| degree[c as usize]);
        let triple_end = (0..=order)
            .map(|d| triples.iter().filter(|&&(_, _, c)| degree[c as usize] <= d).count())
            .collect();
        let factorial = monos
            .iter()
            .map(|m| m.iter().map(|&a| (1..=a as u32).product::<u32>() as f64).product())
            .collect();
        Lattice { monos, index, shift, count, triples, triple_end, factorial }
    }

    fn len(&self) -> usize {
        self.monos.len()
    }

    // number of monomials of degree <= v, with v possibly negative
    fn upto(&self, v: i32) -> usize {
        if v < 0 {
            0
        } else {
            self.count[(v as usize).min(self.count.len() - 1)]
        }
    }

    fn triples_upto(&self, v: i32) -> &[(u32, u32, u32)] {
        if v < 0 {
            &[]
        } else {
            &self.triples[..self.triple_end[(v as usize).min(self.triple_end.len() - 1)]]
        }
    }
}

fn enumerate(n: usize, remaining: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a as u8;
        enumerate(n, remaining - a, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Precomputed multiplication tables for one [`JetSpec`], shared between jets.
#[derive(Debug)]
pub struct Layout {
    spec: JetSpec,
    x: Lattice,
    y: Lattice,
}

impl Layout {
    /// Returns the shared layout for `spec`, building it on first use.
    pub fn get(spec: JetSpec) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<JetSpec, Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(spec)
            .or_insert_with(|| {
                Arc::new(Layout {
                    spec,
                    x: Lattice::new(spec.n_x, spec.order_x),
                    y: Lattice::new(spec.n_y, spec.order_y),
                })
            })
            .clone()
    }

    pub fn spec(&self) -> JetSpec {
        self.spec
    }

    fn width(&self) -> usize {
        self.y.len()
    }

    fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }
}

/// A truncated Taylor jet. See the module docs for the storage convention.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    vx: i32,
    vy: i32,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("spec", &self.layout.spec)
            .field("valid", &(self.vx, self.vy))
            .field("value", &self.c[0])
            .finish()
    }
}

/// Elementary functions that can be applied to a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElemFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// Real power with positive base.
    Pow(f64),
}

/// Minimum |value| at which `abs` is treated as smooth.
pub const ABS_KINK: f64 = 1e-10;

impl Jet {
    pub fn zero(layout: &Arc<Layout>) -> Jet {
        let s = layout.spec;
        Jet { layout: layout.clone(), vx: s.order_x as i32, vy: s.order_y as i32, c: vec![0.0; layout.len()] }
    }

    pub fn constant(layout: &Arc<Layout>, v: f64) -> Jet {
        let mut j = Jet::zero(layout);
        j.c[0] = v;
        j
    }

    /// The position variable `x^i` expanded about `value`.
    pub fn var_x(layout: &Arc<Layout>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(layout, value);
        if layout.spec.order_x > 0 {
            let idx = layout.x.shift[0][i].expect("order_x > 0");
            j.c[idx * layout.width()] = 1.0;
        }
        j
    }

    /// The direction variable `y^i` expanded about `value`.
    pub fn var_y(layout: &Arc<Layout>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(layout, value);
        if layout.spec.order_y > 0 {
            let idx = layout.y.shift[0][i].expect("order_y > 0");
            j.c[idx] = 1.0;
        }
        j
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn spec(&self) -> JetSpec {
        self.layout.spec
    }

    /// Orders `(x, y)` up to which the coefficients are exact. Negative means none.
    pub fn valid_orders(&self) -> (i32, i32) {
        (self.vx, self.vy)
    }

    fn is_void(&self) -> bool {
        self.vx < 0 || self.vy < 0
    }

    /// The function value at the expansion point.
    pub fn value(&self) -> Result<f64, JetError> {
        if self.is_void() {
            return Err(JetError::OrderOverflow { requested: (0, 0), valid: (self.vx, self.vy) });
        }
        Ok(self.c[0])
    }

    /// Value if available, NaN otherwise. Used where exhaustion is a programming error.
    pub fn val(&self) -> f64 {
        if self.is_void() {
            f64::NAN
        } else {
            self.c[0]
        }
    }

    /// Mixed partial derivative `∂^α_x ∂^β_y f` at the expansion point.
    pub fn partial(&self, alpha: &[u8], beta: &[u8]) -> Result<f64, JetError> {
        let s = self.layout.spec;
        if alpha.len() != s.n_x || beta.len() != s.n_y {
            return Err(JetError::SpecMismatch);
        }
        let da: i32 = alpha.iter().map(|&a| a as i32).sum();
        let db: i32 = beta.iter().map(|&b| b as i32).sum();
        if da > self.vx || db > self.vy {
            return Err(JetError::OrderOverflow { requested: (da, db), valid: (self.vx, self.vy) });
        }
        let ia = self.layout.x.index[alpha];
        let ib = self.layout.y.index[beta];
        Ok(self.c[ia * self.layout.width() + ib] * self.layout.x.factorial[ia] * self.layout.y.factorial[ib])
    }

    fn same_layout(&self, other: &Jet) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout.spec == other.layout.spec
    }

    /// Partial derivative with respect to `x^k`, as a jet one x-order shorter.
    pub fn d_x(&self, k: usize) -> Jet {
        let lay = &self.layout;
        let w = lay.width();
        let mut out = Jet { layout: lay.clone(), vx: self.vx - 1, vy: self.vy, c: vec![0.0; lay.len()] };
        let nx = lay.x.upto(out.vx);
        let ny = lay.y.upto(out.vy);
        for a in 0..nx {
            let s = lay.x.shift[a][k].expect("shift inside lattice");
            let f = (lay.x.monos[a][k] + 1) as f64;
            for b in 0..ny {
                out.c[a * w + b] = f * self.c[s * w + b];
            }
        }
        out
    }

    /// Partial derivative with respect to `y^k`, as a jet one y-order shorter.
    pub fn d_y(&self, k: usize) -> Jet {
        let lay = &self.layout;
        let w = lay.width();
        let mut out = Jet { layout: lay.clone(), vx: self.vx, vy: self.vy - 1, c: vec![0.0; lay.len()] };
        let nx = lay.x.upto(out.vx);
        let ny = lay.y.upto(out.vy);
        for b in 0..ny {
            let s = lay.y.shift[b][k].expect("shift inside lattice");
            let f = (lay.y.monos[b][k] + 1) as f64;
            for a in 0..nx {
                out.c[a * w + b] = f * self.c[a * w + s];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn add_assign(&mut self, o: &Jet) {
        debug_assert!(self.same_layout(o));
        self.vx = self.vx.min(o.vx);
        self.vy = self.vy.min(o.vy);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, o: &Jet) {
        debug_assert!(self.same_layout(o));
        self.vx = self.vx.min(o.vx);
        self.vy = self.vy.min(o.vy);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
    }

    /// `self += s * a * b` without intermediate allocation.
    pub fn add_mul(&mut self, s: f64, a: &Jet, b: &Jet) {
        debug_assert!(self.same_layout(a) && self.same_layout(b));
        let vx = self.vx.min(a.vx).min(b.vx);
        let vy = self.vy.min(a.vy).min(b.vy);
        self.vx = vx;
        self.vy = vy;
        if vx < 0 || vy < 0 {
            return;
        }
        let lay = &self.layout;
        let w = lay.width();
        let tx = lay.x.triples_upto(vx);
        let ty = lay.y.triples_upto(vy);
        for &(ia, ib, ic) in tx {
            let (ia, ib, ic) = (ia as usize * w, ib as usize * w, ic as usize * w);
            let ra = &a.c[ia..ia + w];
            let rb = &b.c[ib..ib + w];
            if ra.iter().all(|v| *v == 0.0) || rb.iter().all(|v| *v == 0.0) {
                continue;
            }
            let rc = &mut self.c[ic..ic + w];
            for &(ja, jb, jc) in ty {
                let p = ra[ja as usize];
                if p != 0.0 {
                    rc[jc as usize] += s * p * rb[jb as usize];
                }
            }
        }
    }

    pub fn mul_jet(&self, o: &Jet) -> Jet {
        let mut out = Jet::zero(&self.layout);
        out.vx = self.vx.min(o.vx);
        out.vy = self.vy.min(o.vy);
        out.add_mul(1.0, self, o);
        out
    }

    /// Checked binary arithmetic.
    pub fn arithmetic(&self, o: &Jet, op: ArithOp) -> Result<Jet, JetError> {
        if !self.same_layout(o) {
            return Err(JetError::SpecMismatch);
        }
        Ok(match op {
            ArithOp::Add => self + o,
            ArithOp::Sub => self - o,
            ArithOp::Mul => self * o,
            ArithOp::Div => self.div(o)?,
        })
    }

    // total order available for univariate composition
    fn series_degree(&self) -> usize {
        (self.vx.max(0) + self.vy.max(0)) as usize
    }

    /// Evaluates `Σ coeffs[k] (self - self(0))^k`.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let mut d = self.clone();
        d.c[0] = 0.0;
        let mut r = Jet::constant(&self.layout, *coeffs.last().unwrap_or(&0.0));
        r.vx = self.vx;
        r.vy = self.vy;
        for &ck in coeffs.iter().rev().skip(1) {
            r = &r * &d;
            r.c[0] += ck;
        }
        r
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.value()?;
        if a0 == 0.0 || !a0.is_finite() {
            return Err(JetError::Domain(format!("reciprocal of {a0}")));
        }
        let k = self.series_degree();
        let coeffs: Vec<f64> = (0..=k).map(|i| (-1f64).powi(i as i32) / a0.powi(i as i32 + 1)).collect();
        Ok(self.compose(&coeffs))
    }

    pub fn div(&self, o: &Jet) -> Result<Jet, JetError> {
        if !self.same_layout(o) {
            return Err(JetError::SpecMismatch);
        }
        Ok(self * &o.recip()?)
    }

    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.layout, 1.0);
        result.vx = self.vx;
        result.vy = self.vy;
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// `self^p` for a positive expansion value.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        if p.fract() == 0.0 && p.abs() < 64.0 {
            return self.powi(p as i32);
        }
        let a0 = self.value()?;
        if a0 <= 0.0 {
            return Err(JetError::Domain(format!("real power {p} of non-positive base {a0}")));
        }
        let k = self.series_degree();
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut binom = 1.0;
        for i in 0..=k {
            coeffs.push(binom * a0.powf(p - i as f64));
            binom *= (p - i as f64) / (i as f64 + 1.0);
        }
        Ok(self.compose(&coeffs))
    }

    /// Power with a jet exponent, through `exp(p log a)`.
    pub fn pow_jet(&self, p: &Jet) -> Result<Jet, JetError> {
        let l = self.apply(ElemFn::Log)?;
        (p * &l).apply(ElemFn::Exp)
    }

    /// Applies an elementary function by univariate Taylor composition.
    pub fn apply(&self, f: ElemFn) -> Result<Jet, JetError> {
        let a0 = self.value()?;
        let k = self.series_degree();
        let fact = |i: usize| (1..=i).map(|v| v as f64).product::<f64>();
        match f {
            ElemFn::Exp => {
                let e = a0.exp();
                Ok(self.compose(&(0..=k).map(|i| e / fact(i)).collect::<Vec<_>>()))
            }
            ElemFn::Log => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain(format!("log of {a0}")));
                }
                let mut coeffs = vec![a0.ln()];
                for i in 1..=k {
                    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                    coeffs.push(sign / (i as f64 * a0.powi(i as i32)));
                }
                Ok(self.compose(&coeffs))
            }
            ElemFn::Sin | ElemFn::Cos => {
                let (s, c) = a0.sin_cos();
                let cycle = if f == ElemFn::Sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
                Ok(self.compose(&(0..=k).map(|i| cycle[i % 4] / fact(i)).collect::<Vec<_>>()))
            }
            ElemFn::Tan => {
                let c = self.apply(ElemFn::Cos)?;
                if c.c[0].abs() < 1e-300 {
                    return Err(JetError::Domain(format!("tan at pole {a0}")));
                }
                self.apply(ElemFn::Sin)?.div(&c)
            }
            ElemFn::Sqrt => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain(format!("sqrt of {a0}")));
                }
                self.powf(0.5)
            }
            ElemFn::Abs => {
                if a0.abs() < ABS_KINK {
                    return Err(JetError::Domain(format!("abs at kink {a0}")));
                }
                Ok(if a0 < 0.0 { -self } else { self.clone() })
            }
            ElemFn::Pow(p) => self.powf(p),
        }
    }
}

/// Binary operation selector for [`Jet::arithmetic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Lifts a tangent point into `2n` jet variables `(x^0.., y^0..)`.
pub fn lift_point(x: &[f64], y: &[f64], order_x: usize, order_y: usize) -> (Vec<Jet>, Vec<Jet>) {
    let layout = Layout::get(JetSpec::new(x.len(), y.len(), order_x, order_y));
    let xs = x.iter().enumerate().map(|(i, &v)| Jet::var_x(&layout, i, v)).collect();
    let ys = y.iter().enumerate().map(|(i, &v)| Jet::var_y(&layout, i, v)).collect();
    (xs, ys)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.sub_assign(o);
        r
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.mul_jet(o)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.add_assign(&o);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        self.sub_assign(&o);
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self.mul_jet(&o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lay(nx: usize, ny: usize, ox: usize, oy: usize) -> Arc<Layout> {
        Layout::get(JetSpec::new(nx, ny, ox, oy))
    }

    #[test]
    fn lattice_sizes() {
        let l = Lattice::new(2, 3);
        assert_eq!(l.len(), 10);
        assert_eq!(l.count, vec![1, 3, 6, 10]);
        let l0 = Lattice::new(3, 0);
        assert_eq!(l0.len(), 1);
    }

    #[test]
    fn product_of_polynomials() {
        let l = lay(1, 1, 3, 3);
        let x = Jet::var_x(&l, 0, 2.0);
        let y = Jet::var_y(&l, 0, -1.0);
        // f = x^2 y^3
        let f = &(&x * &x) * &(&(&y * &y) * &y);
        assert_eq!(f.value().unwrap(), -4.0);
        assert_eq!(f.partial(&[1], &[0]).unwrap(), -4.0); // 2xy^3
        assert_eq!(f.partial(&[0], &[1]).unwrap(), 12.0); // 3x^2y^2
        assert_eq!(f.partial(&[2], &[1]).unwrap(), 6.0); // 6y^2
        assert_eq!(f.partial(&[1], &[2]).unwrap(), -24.0); // 12xy
    }

    #[test]
    fn derivative_consumes_order() {
        let l = lay(1, 1, 2, 2);
        let y = Jet::var_y(&l, 0, 1.0);
        let d = y.d_y(0).d_y(0).d_y(0);
        assert_eq!(d.valid_orders(), (2, -1));
        assert!(matches!(d.value(), Err(JetError::OrderOverflow { .. })));
        assert!(matches!(y.partial(&[3], &[0]), Err(JetError::OrderOverflow { .. })));
    }

    #[test]
    fn elementary_against_closed_forms() {
        let l = lay(1, 0, 4, 0);
        let x = Jet::var_x(&l, 0, 0.7);
        let e = x.apply(ElemFn::Exp).unwrap();
        let s = x.apply(ElemFn::Sin).unwrap();
        let g = x.apply(ElemFn::Log).unwrap();
        let r = x.apply(ElemFn::Sqrt).unwrap();
        for k in 0..=4u8 {
            let ek = e.partial(&[k], &[]).unwrap();
            assert!((ek - 0.7f64.exp()).abs() < 1e-13);
        }
        assert!((s.partial(&[3], &[]).unwrap() + 0.7f64.cos()).abs() < 1e-13);
        assert!((g.partial(&[2], &[]).unwrap() + 1.0 / 0.49).abs() < 1e-12);
        assert!((r.partial(&[2], &[]).unwrap() + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-12);
        let t = x.apply(ElemFn::Tan).unwrap();
        let sec2 = 1.0 / 0.7f64.cos().powi(2);
        assert!((t.partial(&[1], &[]).unwrap() - sec2).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let l = lay(1, 0, 2, 0);
        let z = Jet::var_x(&l, 0, 0.0);
        assert!(matches!(z.apply(ElemFn::Log), Err(JetError::Domain(_))));
        assert!(matches!(z.apply(ElemFn::Abs), Err(JetError::Domain(_))));
        assert!(matches!(z.recip(), Err(JetError::Domain(_))));
        assert!(matches!(z.powf(0.5), Err(JetError::Domain(_))));
    }

    #[test]
    fn spec_mismatch() {
        let a = Jet::constant(&lay(1, 1, 1, 1), 1.0);
        let b = Jet::constant(&lay(1, 1, 2, 1), 1.0);
        assert!(matches!(a.arithmetic(&b, ArithOp::Add), Err(JetError::SpecMismatch)));
    }

    #[test]
    fn zero_variable_lift() {
        let (xs, ys) = lift_point(&[], &[], 2, 2);
        assert!(xs.is_empty() && ys.is_empty());
    }
}

//! Scalar expression language for Lagrangians and Randers data.

use std::fmt;

use crate::error::{GeometryError, JetError};
use crate::jet::{ElemFn, Jet, Layout};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn elem(self) -> ElemFn {
        match self {
            Func::Sin => ElemFn::Sin,
            Func::Cos => ElemFn::Cos,
            Func::Tan => ElemFn::Tan,
            Func::Exp => ElemFn::Exp,
            Func::Log => ElemFn::Log,
            Func::Sqrt => ElemFn::Sqrt,
            Func::Abs => ElemFn::Abs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }
    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }
    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_) | Expr::X(_) | Expr::Y(_) => vec![],
            Expr::Neg(a) | Expr::Call(_, a) => vec![a],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn uses_y(&self) -> bool {
        matches!(self, Expr::Y(_)) || self.children().iter().any(|c| c.uses_y())
    }

    pub fn uses_x(&self) -> bool {
        matches!(self, Expr::X(_)) || self.children().iter().any(|c| c.uses_x())
    }

    pub fn is_constant(&self) -> bool {
        !self.uses_x() && !self.uses_y()
    }

    /// Replaces `x^i` by `sub[i]`.
    pub fn substitute_x(&self, sub: &[Expr]) -> Expr {
        let r = |e: &Expr| Box::new(e.substitute_x(sub));
        match self {
            Expr::X(i) => sub[*i].clone(),
            Expr::Num(_) | Expr::Y(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Call(f, a) => Expr::Call(*f, r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Pow(a, b) => Expr::Pow(r(a), r(b)),
        }
    }

    /// Replaces `y^i` by `sub[i]`.
    pub fn substitute_y(&self, sub: &[Expr]) -> Expr {
        let r = |e: &Expr| Box::new(e.substitute_y(sub));
        match self {
            Expr::Y(i) => sub[*i].clone(),
            Expr::Num(_) | Expr::X(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Call(f, a) => Expr::Call(*f, r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Pow(a, b) => Expr::Pow(r(a), r(b)),
        }
    }

    /// Evaluates with real arithmetic.
    pub fn eval_f64(&self, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
        eval(self, &RealAlgebra { x, y })
    }

    /// Evaluates as a jet with the given variables.
    pub fn eval_jet(&self, layout: &Arc<Layout>, x: &[Jet], y: &[Jet]) -> Result<Jet, GeometryError> {
        eval(self, &JetAlgebra { layout, x, y })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X(i) => write!(f, "x{i}"),
            Expr::Y(i) => write!(f, "y{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Arithmetic backend used by [`eval`].
pub trait Algebra {
    type Elem: Clone;
    fn constant(&self, v: f64) -> Self::Elem;
    fn x(&self, i: usize) -> Self::Elem;
    fn y(&self, i: usize) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, GeometryError>;
    fn powi(&self, a: &Self::Elem, n: i32) -> Result<Self::Elem, GeometryError>;
    fn powf(&self, a: &Self::Elem, p: f64) -> Result<Self::Elem, GeometryError>;
    fn pow(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, GeometryError>;
    fn func(&self, f: Func, a: &Self::Elem) -> Result<Self::Elem, GeometryError>;
}

pub fn eval<A: Algebra>(e: &Expr, alg: &A) -> Result<A::Elem, GeometryError> {
    Ok(match e {
        Expr::Num(v) => alg.constant(*v),
        Expr::X(i) => alg.x(*i),
        Expr::Y(i) => alg.y(*i),
        Expr::Neg(a) => alg.neg(&eval(a, alg)?),
        Expr::Add(a, b) => alg.add(&eval(a, alg)?, &eval(b, alg)?),
        Expr::Sub(a, b) => alg.sub(&eval(a, alg)?, &eval(b, alg)?),
        Expr::Mul(a, b) => alg.mul(&eval(a, alg)?, &eval(b, alg)?),
        Expr::Div(a, b) => alg.div(&eval(a, alg)?, &eval(b, alg)?)?,
        Expr::Pow(a, b) => {
            let base = eval(a, alg)?;
            match constant_value(b) {
                Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => alg.powi(&base, p as i32)?,
                Some(p) => alg.powf(&base, p)?,
                None => alg.pow(&base, &eval(b, alg)?)?,
            }
        }
        Expr::Call(f, a) => alg.func(*f, &eval(a, alg)?)?,
    })
}

fn constant_value(e: &Expr) -> Option<f64> {
    if e.is_constant() {
        e.eval_f64(&[], &[]).ok()
    } else {
        None
    }
}

pub struct RealAlgebra<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn finite(v: f64, what: &str) -> Result<f64, GeometryError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeometryError::Domain(format!("{what} is not finite")))
    }
}

impl Algebra for RealAlgebra<'_> {
    type Elem = f64;
    fn constant(&self, v: f64) -> f64 {
        v
    }
    fn x(&self, i: usize) -> f64 {
        self.x[i]
    }
    fn y(&self, i: usize) -> f64 {
        self.y[i]
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn neg(&self, a: &f64) -> f64 {
        -a
    }
    fn div(&self, a: &f64, b: &f64) -> Result<f64, GeometryError> {
        if *b == 0.0 {
            return Err(GeometryError::Domain("division by zero".into()));
        }
        finite(a / b, "quotient")
    }
    fn powi(&self, a: &f64, n: i32) -> Result<f64, GeometryError> {
        if n < 0 && *a == 0.0 {
            return Err(GeometryError::Domain("negative power of zero".into()));
        }
        finite(a.powi(n), "power")
    }
    fn powf(&self, a: &f64, p: f64) -> Result<f64, GeometryError> {
        if *a <= 0.0 {
            return Err(GeometryError::Domain(format!("real power of non-positive base {a}")));
        }
        finite(a.powf(p), "power")
    }
    fn pow(&self, a: &f64, b: &f64) -> Result<f64, GeometryError> {
        if b.fract() == 0.0 && b.abs() <= 64.0 {
            self.powi(a, *b as i32)
        } else {
            self.powf(a, *b)
        }
    }
    fn func(&self, f: Func, a: &f64) -> Result<f64, GeometryError> {
        let v = *a;
        let r = match f {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(GeometryError::Domain(format!("log of {v}")));
                }
                v.ln()
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(GeometryError::Domain(format!("sqrt of {v}")));
                }
                v.sqrt()
            }
            Func::Abs => v.abs(),
        };
        finite(r, f.name())
    }
}

pub struct JetAlgebra<'a> {
    pub layout: &'a Arc<Layout>,
    pub x: &'a [Jet],
    pub y: &'a [Jet],
}

impl Algebra for JetAlgebra<'_> {
    type Elem = Jet;
    fn constant(&self, v: f64) -> Jet {
        Jet::constant(self.layout, v)
    }
    fn x(&self, i: usize) -> Jet {
        self.x[i].clone()
    }
    fn y(&self, i: usize) -> Jet {
        self.y[i].clone()
    }
    fn add(&self, a: &Jet, b: &Jet) -> Jet {
        a + b
    }
    fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        a - b
    }
    fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        a * b
    }
    fn neg(&self, a: &Jet) -> Jet {
        -a
    }
    fn div(&self, a: &Jet, b: &Jet) -> Result<Jet, GeometryError> {
        a.div(b).map_err(domain)
    }
    fn powi(&self, a: &Jet, n: i32) -> Result<Jet, GeometryError> {
        a.powi(n).map_err(domain)
    }
    fn powf(&self, a: &Jet, p: f64) -> Result<Jet, GeometryError> {
        a.powf(p).map_err(domain)
    }
    fn pow(&self, a: &Jet, b: &Jet) -> Result<Jet, GeometryError> {
        a.pow_jet(b).map_err(domain)
    }
    fn func(&self, f: Func, a: &Jet) -> Result<Jet, GeometryError> {
        a.apply(f.elem()).map_err(domain)
    }
}

fn domain(e: JetError) -> GeometryError {
    match e {
        JetError::Domain(m) => GeometryError::Domain(m),
        other => GeometryError::Jet(other),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

/// Column-tagged parse failure inside a single expression (1-based column).
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| ExprError { column: col, message: format!("malformed number {text:?}") })?;
            out.push((Tok::Num(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError { column: col, message: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

/// Resolution of bare identifiers that are not functions.
pub trait Names {
    fn resolve(&self, name: &str) -> Option<Expr>;
}

/// Standard names: `x<i>`, `y<i>` for `i < dim`, `pi`, `e`, plus parameters.
pub struct StdNames<'a> {
    pub dim: usize,
    pub params: &'a [(String, f64)],
}

impl Names for StdNames<'_> {
    fn resolve(&self, name: &str) -> Option<Expr> {
        if let Some((_, v)) = self.params.iter().find(|(p, _)| p == name) {
            return Some(Expr::Num(*v));
        }
        match name {
            "pi" => return Some(Expr::Num(std::f64::consts::PI)),
            "e" => return Some(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        let (head, rest) = name.split_at(1);
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) || (rest.len() > 1 && rest.starts_with('0')) {
            return None;
        }
        let i: usize = rest.parse().ok()?;
        if i >= self.dim {
            return None;
        }
        match head {
            "x" => Some(Expr::X(i)),
            "y" => Some(Expr::Y(i)),
            _ => None,
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    names: &'a dyn Names,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { column: self.col(), message: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return self.err(format!("expected '(' after {name}"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    return Ok(Expr::call(f, arg));
                }
                self.names
                    .resolve(&name)
                    .ok_or(ExprError { column: col, message: format!("unknown identifier {name:?}") })
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected {c:?}")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses one expression.
pub fn parse_expr(src: &str, names: &dyn Names) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, end_col: src.chars().count() + 1, names };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Expr, ExprError> {
        parse_expr(s, &StdNames { dim: 2, params: &[("k".into(), 3.0)] })
    }

    fn ev(s: &str) -> f64 {
        parse(s).unwrap().eval_f64(&[0.5, 2.0], &[1.5, -1.0]).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2*3+4/2-1"), 7.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("k*x0 + y1"), 0.5);
        assert!((ev("sin(pi/2) + log(e)") - 2.0).abs() < 1e-15);
        assert_eq!(ev("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse("x0 + z").unwrap_err();
        assert_eq!(e.column, 6);
        assert!(e.message.contains("unknown identifier"));
        assert_eq!(parse("x2").unwrap_err().column, 1);
        assert_eq!(parse("(y0").unwrap_err().column, 4);
        assert!(parse("y0 y1").is_err());
        assert!(parse("sin y0").is_err());
    }

    #[test]
    fn real_domain_errors() {
        let e = parse("log(x0 - 1)").unwrap();
        assert!(matches!(e.eval_f64(&[0.5, 0.0], &[0.0, 0.0]), Err(GeometryError::Domain(_))));
        let p = parse("x0^0.5").unwrap();
        assert!(p.eval_f64(&[-1.0, 0.0], &[0.0, 0.0]).is_err());
        let q = parse("x0^2").unwrap();
        assert_eq!(q.eval_f64(&[-1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
    }
}

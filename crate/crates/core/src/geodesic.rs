//! Geodesics of the spray and transport of vectors along curves.
//!
//! Geodesics solve `ẋ = y, ẏ = −2𝒢(x, y)`. Two transports are offered:
//!
//! * parallel transport with the non-linear covariant derivative,
//!   `dV^a/dt + N^a_k(x, V) ẋ^k = 0`, which is non-linear in `V`;
//! * flipped transport, `dV^a/dt + N^a_k(x, ẋ) V^k = 0`, which is linear.
//!
//! All ODEs are integrated with the Dormand–Prince 5(4) pair under PI step
//! control, and sampled through its continuous extension.

use std::cell::RefCell;
use std::io::{self, Write};

use ode_solvers::continuous_output_model::ContinuousOutputModel;
use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{DVector, Dopri5, OutputType, System};
use rayon::prelude::*;

use crate::error::{GeodesicError, GeometryError};
use crate::lagrangian::{eval_l, metric, LagrangianDef, TangentPoint};
use crate::spray::{nonlinear_value, spray_value};

/// Step-size control of the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u32,
    /// Upper bound on the step, `None` for the whole interval.
    pub h_max: Option<f64>,
    /// Take steps of exactly this size without error control.
    pub fixed_step: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000, h_max: None, fixed_step: None }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), GeodesicError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.rtol) || !pos(self.atol) {
            return Err(GeodesicError::InvalidArgument("tolerances must be positive and finite".into()));
        }
        if self.h_max.is_some_and(|h| !pos(h)) || self.fixed_step.is_some_and(|h| !pos(h)) {
            return Err(GeodesicError::InvalidArgument("step sizes must be positive and finite".into()));
        }
        if self.max_steps == 0 {
            return Err(GeodesicError::InvalidArgument("step budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u32,
    pub rejected: u32,
    pub evaluations: u32,
}

/// `count` equally spaced times from `t0` to `t1`, both included.
pub fn sample_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    let last = (count - 1).max(1) as f64;
    (0..count).map(|i| if i + 1 == count { t1 } else { t0 + (t1 - t0) * (i as f64 / last) }).collect()
}

type Rhs<'a> = dyn Fn(f64, &[f64]) -> Result<Vec<f64>, GeodesicError> + 'a;

struct OdeSystem<'a> {
    rhs: &'a Rhs<'a>,
    t0: f64,
    failure: &'a RefCell<Option<GeodesicError>>,
}

// The solver runs in `s = t − t0` from zero, because its continuous output
// keys the steps by `|s|`.
impl System<f64, DVector<f64>> for OdeSystem<'_> {
    fn system(&self, s: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        if self.failure.borrow().is_none() {
            match (self.rhs)(self.t0 + s, y.as_slice()) {
                Ok(v) => {
                    dy.copy_from_slice(&v);
                    return;
                }
                Err(e) => *self.failure.borrow_mut() = Some(e),
            }
        }
        // A zero derivative lets the current step finish so that `solout`
        // can stop the run.
        dy.fill(0.0);
    }

    fn solout(&mut self, s: f64, y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        if self.failure.borrow().is_none() && !y.iter().all(|v| v.is_finite()) {
            *self.failure.borrow_mut() = Some(GeodesicError::NonFinite { t: self.t0 + s });
        }
        self.failure.borrow().is_some()
    }
}

/// Integrates `u' = rhs(t, u)` from `t0` to `t1` and returns the state at each of `times`.
fn integrate(
    rhs: &Rhs,
    t0: f64,
    u0: &[f64],
    t1: f64,
    times: &[f64],
    ctrl: &StepControl,
) -> Result<(Vec<Vec<f64>>, StepStats), GeodesicError> {
    ctrl.validate()?;
    let span = t1 - t0;
    let (rtol, atol, h_max, h0) = match ctrl.fixed_step {
        // With tolerances this loose every step is accepted at the maximum size.
        Some(h) => (1e30, 1e30, h, h),
        None => (ctrl.rtol, ctrl.atol, ctrl.h_max.unwrap_or(span), 0.0),
    };
    let failure = RefCell::new(None);
    let system = OdeSystem { rhs, t0, failure: &failure };
    let mut solver = Dopri5::from_param(
        system,
        0.0,
        span,
        span,
        DVector::from_column_slice(u0),
        rtol,
        atol,
        0.9,
        0.04,
        0.2,
        10.0,
        h_max,
        h0,
        ctrl.max_steps,
        // Stiffness detection off: a stiff geodesic is still a geodesic.
        u32::MAX,
        OutputType::Continuous,
    );
    let mut model = ContinuousOutputModel::default();
    let result = solver.integrate_with_continuous_output_model(&mut model);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let stats = result.map_err(|e| match e {
        IntegrationError::MaxNumStepReached { x, .. } => GeodesicError::TooManySteps { t: t0 + x },
        IntegrationError::StepSizeUnderflow { x } | IntegrationError::StiffnessDetected { x } => {
            GeodesicError::StepUnderflow { t: t0 + x }
        }
    })?;
    let last = solver.y_out().last().map(|u| u.as_slice().to_vec()).unwrap_or_else(|| u0.to_vec());
    let states = times
        .iter()
        .map(|&t| {
            let u = if t == t0 {
                u0.to_vec()
            } else if t == t1 {
                last.clone()
            } else {
                model.evaluate(t - t0).ok_or(GeodesicError::NonFinite { t })?.as_slice().to_vec()
            };
            if u.iter().all(|v| v.is_finite()) {
                Ok(u)
            } else {
                Err(GeodesicError::NonFinite { t })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let stats = StepStats {
        accepted: stats.accepted_steps,
        rejected: stats.rejected_steps,
        evaluations: stats.num_eval,
    };
    Ok((states, stats))
}

fn at(t: f64) -> impl Fn(GeometryError) -> GeodesicError {
    move |source| GeodesicError::Point { t, source }
}

fn split(u: &[f64], n: usize) -> (TangentPoint, &[f64]) {
    (TangentPoint::new(u[..n].to_vec(), u[n..2 * n].to_vec()), &u[2 * n..])
}

/// A sampled geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrace {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    /// Velocity.
    pub y: Vec<Vec<f64>>,
    /// `L(x, y)` at every sample.
    pub l: Vec<f64>,
    /// `max |L(x(t), y(t)) − L(x(0), y(0))|` over the samples.
    pub l_drift: f64,
    pub stats: StepStats,
}

impl GeodesicTrace {
    /// `l_drift / |L₀|`, or the absolute drift when `L₀ = 0`.
    pub fn relative_drift(&self) -> f64 {
        let l0 = self.l[0].abs();
        if l0 > 0.0 {
            self.l_drift / l0
        } else {
            self.l_drift
        }
    }
}

fn check_span(t_end: f64, samples: usize) -> Result<(), GeodesicError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(GeodesicError::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if samples < 2 {
        return Err(GeodesicError::InvalidArgument("at least two samples are needed".into()));
    }
    Ok(())
}

/// Integrates the geodesic through `p0` on `[0, t_end]`, sampled at `samples` equally spaced times.
pub fn integrate_geodesic(
    def: &LagrangianDef,
    p0: &TangentPoint,
    t_end: f64,
    samples: usize,
    ctrl: &StepControl,
) -> Result<GeodesicTrace, GeodesicError> {
    check_span(t_end, samples)?;
    let n = def.dim;
    let l0 = eval_l(def, p0).map_err(at(0.0))?;
    let rhs = |t: f64, u: &[f64]| -> Result<Vec<f64>, GeodesicError> {
        let (p, _) = split(u, n);
        let g = spray_value(def, &p).map_err(at(t))?;
        let mut du = p.y.clone();
        du.extend(g.data().iter().map(|v| -2.0 * v));
        Ok(du)
    };
    let u0: Vec<f64> = p0.x.iter().chain(&p0.y).copied().collect();
    let times = sample_times(0.0, t_end, samples);
    let (states, stats) = integrate(&rhs, 0.0, &u0, t_end, &times, ctrl)?;
    let mut trace = GeodesicTrace { t: times, x: vec![], y: vec![], l: vec![], l_drift: 0.0, stats };
    for (u, &t) in states.iter().zip(&trace.t) {
        let (p, _) = split(u, n);
        let l = eval_l(def, &p).map_err(at(t))?;
        trace.l_drift = trace.l_drift.max((l - l0).abs());
        trace.l.push(l);
        trace.x.push(p.x);
        trace.y.push(p.y);
    }
    Ok(trace)
}

/// Independent geodesics, integrated concurrently. Results keep the order of `starts`.
pub fn integrate_batch(
    def: &LagrangianDef,
    starts: &[TangentPoint],
    t_end: f64,
    samples: usize,
    ctrl: &StepControl,
) -> Vec<Result<GeodesicTrace, GeodesicError>> {
    starts.par_iter().map(|p| integrate_geodesic(def, p, t_end, samples, ctrl)).collect()
}

/// A parametrized curve `t ↦ x(t)` on a closed interval.
pub trait Curve: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    fn position(&self, t: f64) -> Vec<f64>;
    fn velocity(&self, t: f64) -> Vec<f64>;
}

/// A curve given by closures for position and velocity.
pub struct FnCurve<P, V> {
    dim: usize,
    domain: (f64, f64),
    pos: P,
    vel: V,
}

impl<P, V> FnCurve<P, V>
where
    P: Fn(f64) -> Vec<f64> + Sync,
    V: Fn(f64) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, domain: (f64, f64), pos: P, vel: V) -> Self {
        FnCurve { dim, domain, pos, vel }
    }
}

impl<P, V> Curve for FnCurve<P, V>
where
    P: Fn(f64) -> Vec<f64> + Sync,
    V: Fn(f64) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn position(&self, t: f64) -> Vec<f64> {
        (self.pos)(t)
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        (self.vel)(t)
    }
}

/// A natural cubic spline through a sampled polyline.
///
/// The velocity of the spline stands in for `ẋ`. Its accuracy is that of
/// the sampling, so dense knots are the caller's responsibility.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve {
    knots: Vec<f64>,
    points: Vec<Vec<f64>>,
    // Second derivatives at the knots, per knot.
    second: Vec<Vec<f64>>,
}

impl SplineCurve {
    pub fn new(knots: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self, GeodesicError> {
        let m = knots.len();
        if m < 2 || points.len() != m {
            return Err(GeodesicError::InvalidArgument("a spline needs at least two knots, one point each".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeodesicError::InvalidArgument("spline knots must increase strictly".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(GeodesicError::InvalidArgument("spline points must share a dimension".into()));
        }
        let mut second = vec![vec![0.0; dim]; m];
        for c in 0..dim {
            let col: Vec<f64> = points.iter().map(|p| p[c]).collect();
            for (i, v) in natural_second_derivatives(&knots, &col).into_iter().enumerate() {
                second[i][c] = v;
            }
        }
        Ok(SplineCurve { knots, points, second })
    }

    fn segment(&self, t: f64) -> (usize, f64, f64, f64) {
        let m = self.knots.len();
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(m - 2),
            Err(i) => i.clamp(1, m - 1) - 1,
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        (i, h, a, 1.0 - a)
    }
}

// Tridiagonal solve with zero second derivative at both ends.
fn natural_second_derivatives(t: &[f64], v: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut out = vec![0.0; m];
    if m < 3 {
        return out;
    }
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for i in 1..m - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0;
    }
    for i in 2..m - 1 {
        let w = ((t[i] - t[i - 1]) / 6.0) / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for i in (1..m - 1).rev() {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
    out
}

impl Curve for SplineCurve {
    fn dim(&self) -> usize {
        self.points[0].len()
    }
    fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }
    fn position(&self, t: f64) -> Vec<f64> {
        let (i, h, a, b) = self.segment(t);
        (0..self.dim())
            .map(|c| {
                let (m0, m1) = (self.second[i][c], self.second[i + 1][c]);
                a * self.points[i][c]
                    + b * self.points[i + 1][c]
                    + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
            })
            .collect()
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        let (i, h, a, b) = self.segment(t);
        (0..self.dim())
            .map(|c| {
                let (m0, m1) = (self.second[i][c], self.second[i + 1][c]);
                (self.points[i + 1][c] - self.points[i][c]) / h
                    - (3.0 * a * a - 1.0) / 6.0 * h * m0
                    + (3.0 * b * b - 1.0) / 6.0 * h * m1
            })
            .collect()
    }
}

/// The curve along which a vector is transported.
pub enum Path<'a> {
    /// The geodesic through `start`, integrated together with the vector.
    Geodesic { start: TangentPoint, t_end: f64 },
    Curve(&'a dyn Curve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// `dV/dt + N(x, V) ẋ = 0`, non-linear in `V`.
    Parallel,
    /// `dV/dt + N(x, ẋ) V = 0`, linear in `V`.
    Flip,
}

impl TransportKind {
    pub fn name(self) -> &'static str {
        match self {
            TransportKind::Parallel => "parallel",
            TransportKind::Flip => "flip",
        }
    }

    pub fn is_linear(self) -> bool {
        self == TransportKind::Flip
    }
}

/// A vector transported along a sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportTrace {
    pub kind: TransportKind,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub xdot: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// `L(x, ẋ)` at every sample.
    pub l: Vec<f64>,
    /// Drift of `g_u(V, V)` over the samples, with `u = V` for parallel and
    /// `u = ẋ` for flipped transport. The first is conserved along any curve,
    /// the second along geodesics of Landsberg spaces.
    pub norm_drift: f64,
    pub stats: StepStats,
}

fn quadratic(def: &LagrangianDef, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
    let g = metric(def, &TangentPoint::new(x.to_vec(), u.to_vec()))?.g;
    let n = x.len();
    Ok((0..n).map(|i| (0..n).map(|j| g[[i, j]] * v[i] * v[j]).sum::<f64>()).sum())
}

// dV^a/dt for either transport.
fn transport_rate(
    def: &LagrangianDef,
    kind: TransportKind,
    t: f64,
    x: &[f64],
    xdot: &[f64],
    v: &[f64],
) -> Result<Vec<f64>, GeodesicError> {
    let n = x.len();
    let (dir, arg) = match kind {
        TransportKind::Parallel => (v, xdot),
        TransportKind::Flip => (xdot, v),
    };
    let nl = nonlinear_value(def, &TangentPoint::new(x.to_vec(), dir.to_vec())).map_err(at(t))?;
    Ok((0..n).map(|a| -(0..n).map(|k| nl[[a, k]] * arg[k]).sum::<f64>()).collect())
}

pub fn transport(
    def: &LagrangianDef,
    path: &Path,
    v0: &[f64],
    kind: TransportKind,
    samples: usize,
    ctrl: &StepControl,
) -> Result<TransportTrace, GeodesicError> {
    let n = def.dim;
    if v0.len() != n {
        return Err(GeodesicError::InvalidArgument(format!("V0 has {} components, expected {n}", v0.len())));
    }
    let guard = TangentPoint::new(vec![0.0; n], v0.to_vec());
    if kind == TransportKind::Parallel && guard.y_norm() < def.options.y_min {
        return Err(GeodesicError::Point { t: 0.0, source: GeometryError::SmallDirection { norm: guard.y_norm() } });
    }

    let (t0, t1, rows, stats) = match path {
        Path::Geodesic { start, t_end } => {
            check_span(*t_end, samples)?;
            let rhs = |t: f64, u: &[f64]| -> Result<Vec<f64>, GeodesicError> {
                let (p, v) = split(u, n);
                let g = spray_value(def, &p).map_err(at(t))?;
                let dv = transport_rate(def, kind, t, &p.x, &p.y, v)?;
                let mut du = p.y.clone();
                du.extend(g.data().iter().map(|v| -2.0 * v));
                du.extend(dv);
                Ok(du)
            };
            let u0: Vec<f64> = start.x.iter().chain(&start.y).chain(v0).copied().collect();
            let times = sample_times(0.0, *t_end, samples);
            let (states, stats) = integrate(&rhs, 0.0, &u0, *t_end, &times, ctrl)?;
            let rows = states
                .into_iter()
                .map(|u| (u[..n].to_vec(), u[n..2 * n].to_vec(), u[2 * n..].to_vec()))
                .collect::<Vec<_>>();
            (0.0, *t_end, rows, stats)
        }
        Path::Curve(curve) => {
            if curve.dim() != n {
                return Err(GeodesicError::InvalidArgument("curve dimension differs from the definition".into()));
            }
            let (t0, t1) = curve.domain();
            check_span(t1 - t0, samples)?;
            let rhs = |t: f64, v: &[f64]| transport_rate(def, kind, t, &curve.position(t), &curve.velocity(t), v);
            let times = sample_times(t0, t1, samples);
            let (states, stats) = integrate(&rhs, t0, v0, t1, &times, ctrl)?;
            let rows = times
                .iter()
                .zip(states)
                .map(|(&t, v)| (curve.position(t), curve.velocity(t), v))
                .collect::<Vec<_>>();
            (t0, t1, rows, stats)
        }
    };

    let mut trace = TransportTrace {
        kind,
        t: sample_times(t0, t1, samples),
        x: vec![],
        xdot: vec![],
        v: vec![],
        l: vec![],
        norm_drift: 0.0,
        stats,
    };
    let mut q0 = None;
    for ((x, xdot, v), &t) in rows.into_iter().zip(&trace.t) {
        let dir = if kind == TransportKind::Parallel { &v } else { &xdot };
        let q = quadratic(def, &x, dir, &v).map_err(at(t))?;
        let q0 = *q0.get_or_insert(q);
        trace.norm_drift = trace.norm_drift.max((q - q0).abs());
        trace.l.push(eval_l(def, &TangentPoint::new(x.clone(), xdot.clone())).map_err(at(t))?);
        trace.x.push(x);
        trace.xdot.push(xdot);
        trace.v.push(v);
    }
    Ok(trace)
}

pub fn parallel_transport(
    def: &LagrangianDef,
    path: &Path,
    v0: &[f64],
    samples: usize,
    ctrl: &StepControl,
) -> Result<TransportTrace, GeodesicError> {
    transport(def, path, v0, TransportKind::Parallel, samples, ctrl)
}

pub fn flip_transport(
    def: &LagrangianDef,
    path: &Path,
    v0: &[f64],
    samples: usize,
    ctrl: &StepControl,
) -> Result<TransportTrace, GeodesicError> {
    transport(def, path, v0, TransportKind::Flip, samples, ctrl)
}

/// Full-precision decimal form used in all exported data.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_header(n: usize, with_v: bool) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..n).map(|i| format!("x{i}")));
    cols.extend((0..n).map(|i| format!("y{i}")));
    if with_v {
        cols.extend((0..n).map(|i| format!("V{i}")));
    }
    cols.push("L".into());
    cols.join(",")
}

fn csv_row(w: &mut impl Write, fields: impl Iterator<Item = f64>) -> io::Result<()> {
    let row: Vec<String> = fields.map(format_float).collect();
    writeln!(w, "{}", row.join(","))
}

/// Writes `t, x0.., y0.., L`, one row per sample.
pub fn write_geodesic_csv(w: &mut impl Write, trace: &GeodesicTrace) -> io::Result<()> {
    let n = trace.x.first().map_or(0, Vec::len);
    writeln!(w, "{}", csv_header(n, false))?;
    for i in 0..trace.t.len() {
        let fields = std::iter::once(trace.t[i])
            .chain(trace.x[i].iter().copied())
            .chain(trace.y[i].iter().copied())
            .chain(std::iter::once(trace.l[i]));
        csv_row(w, fields)?;
    }
    Ok(())
}

/// Writes `t, x0.., y0.., V0.., L` with `y = ẋ`, one row per sample.
pub fn write_transport_csv(w: &mut impl Write, trace: &TransportTrace) -> io::Result<()> {
    let n = trace.x.first().map_or(0, Vec::len);
    writeln!(w, "{}", csv_header(n, true))?;
    for i in 0..trace.t.len() {
        let fields = std::iter::once(trace.t[i])
            .chain(trace.x[i].iter().copied())
            .chain(trace.xdot[i].iter().copied())
            .chain(trace.v[i].iter().copied())
            .chain(std::iter::once(trace.l[i]));
        csv_row(w, fields)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_times_hit_endpoints() {
        let t = sample_times(0.0, 3.0, 31);
        assert_eq!(t.len(), 31);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[30], 3.0);
        assert!((t[10] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spline_reproduces_lines_and_interpolates() {
        let knots: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let pts: Vec<Vec<f64>> = knots.iter().map(|t| vec![2.0 * t + 1.0, -t]).collect();
        let s = SplineCurve::new(knots.clone(), pts).unwrap();
        for t in [0.0, 0.3, 1.7, 2.5] {
            let p = s.position(t);
            assert!((p[0] - (2.0 * t + 1.0)).abs() < 1e-14 && (p[1] + t).abs() < 1e-14);
            let v = s.velocity(t);
            assert!((v[0] - 2.0).abs() < 1e-13 && (v[1] + 1.0).abs() < 1e-13);
        }
        let knots: Vec<f64> = (0..200).map(|i| i as f64 * 0.02).collect();
        let pts = knots.iter().map(|t| vec![t.sin()]).collect();
        let s = SplineCurve::new(knots, pts).unwrap();
        assert!((s.position(1.234)[0] - 1.234f64.sin()).abs() < 1e-6);
        assert!((s.velocity(1.234)[0] - 1.234f64.cos()).abs() < 1e-4);
    }

    #[test]
    fn invalid_controls() {
        let c = StepControl { rtol: 0.0, ..StepControl::default() };
        assert!(c.validate().is_err());
        let c = StepControl { fixed_step: Some(-1.0), ..StepControl::default() };
        assert!(c.validate().is_err());
    }
}

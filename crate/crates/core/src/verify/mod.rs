//! Registry of geometric identities and a runner that evaluates them over
//! samples of tangent points.
//!
//! Each residual is `max|Σ terms| / (1 + max|term|)` over the components of the
//! identity, so it is insensitive to the overall size of the tensors involved.

mod context;
mod registry;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::diffeo;
use crate::error::{GeometryError, VerifyError};
use crate::geometry::ConnectionKind;
use crate::lagrangian::{EvalOptions, LagrangianDef, TangentPoint};

pub(crate) use context::defect;
use context::{Ctx, Res};

pub(crate) enum Residual {
    Once(fn(&Ctx) -> Res),
    PerKind(fn(&Ctx, ConnectionKind) -> Res),
}

/// One named identity.
pub struct IdentitySpec {
    pub id: &'static str,
    /// The identity as a formula.
    pub statement: &'static str,
    /// Connection kinds the identity refers to.
    pub scope: &'static [ConnectionKind],
    residual: Residual,
}

impl IdentitySpec {
    /// Kinds of `kinds` that fall in this identity's scope.
    pub fn active_kinds(&self, kinds: &[ConnectionKind]) -> Vec<ConnectionKind> {
        self.scope.iter().copied().filter(|k| kinds.contains(k)).collect()
    }

    fn eval(&self, ctx: &Ctx, kinds: &[ConnectionKind]) -> f64 {
        let r = match self.residual {
            Residual::Once(f) => f(ctx),
            Residual::PerKind(f) => self
                .active_kinds(kinds)
                .into_iter()
                .map(|k| f(ctx, k))
                .try_fold(0.0f64, |m, r| r.map(|v| if v.is_nan() { f64::INFINITY } else { m.max(v) })),
        };
        match r {
            Ok(v) if !v.is_nan() => v,
            _ => f64::INFINITY,
        }
    }
}

impl std::fmt::Debug for IdentitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentitySpec")
            .field("id", &self.id)
            .field("statement", &self.statement)
            .field("scope", &self.scope)
            .finish()
    }
}

/// The full registry, in a fixed order.
pub fn list_identities() -> &'static [IdentitySpec] {
    static REGISTRY: OnceLock<Vec<IdentitySpec>> = OnceLock::new();
    REGISTRY.get_or_init(registry::build)
}

pub fn lookup(id: &str) -> Result<&'static IdentitySpec, VerifyError> {
    list_identities()
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| VerifyError::UnknownIdentity(id.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// No selected connection kind is in the identity's scope.
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub id: &'static str,
    pub statement: &'static str,
    pub status: Status,
    pub max: f64,
    pub mean: f64,
    /// Index into the sample of the worst point.
    pub argmax: Option<usize>,
    pub argmax_point: Option<TangentPoint>,
    /// Condition number of `g` at the worst point.
    pub argmax_cond: Option<f64>,
    /// Points at which the residual was evaluated, failures included.
    pub evaluated: usize,
    /// Points at which evaluation failed outright.
    pub failures: usize,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub index: usize,
    pub point: TangentPoint,
    pub error: GeometryError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub tol: f64,
    pub samples: usize,
    pub kinds: Vec<ConnectionKind>,
    pub identities: Vec<IdentityReport>,
    /// Points at which the geometry itself could not be evaluated.
    pub point_errors: Vec<PointError>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.identities.iter().all(IdentityReport::pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &IdentityReport> {
        self.identities.iter().filter(|r| r.status == Status::Fail)
    }
}

/// Evaluation options used by the suite. The homogeneity pre-check is the
/// subject of an identity of its own, so it is not allowed to abort a point.
fn suite_def(def: &LagrangianDef) -> LagrangianDef {
    def.clone().with_options(EvalOptions { homogeneity_tol: None, ..def.options })
}

/// Runs every registered identity over `points` for all connection kinds.
pub fn run_suite(def: &LagrangianDef, points: &[TangentPoint], tol: f64) -> Result<SuiteReport, VerifyError> {
    run_suite_kinds(def, points, tol, &ConnectionKind::ALL)
}

/// Runs the registry restricted to the connection kinds in `kinds`.
pub fn run_suite_kinds(
    def: &LagrangianDef,
    points: &[TangentPoint],
    tol: f64,
    kinds: &[ConnectionKind],
) -> Result<SuiteReport, VerifyError> {
    let specs: Vec<&IdentitySpec> = list_identities().iter().collect();
    run_specs(def, points, tol, kinds, &specs)
}

/// Runs the identities named in `ids`, in the given order.
pub fn run_selected(
    def: &LagrangianDef,
    points: &[TangentPoint],
    tol: f64,
    kinds: &[ConnectionKind],
    ids: &[&str],
) -> Result<SuiteReport, VerifyError> {
    let specs = ids.iter().map(|id| lookup(id)).collect::<Result<Vec<_>, _>>()?;
    run_specs(def, points, tol, kinds, &specs)
}

fn run_specs(
    def: &LagrangianDef,
    points: &[TangentPoint],
    tol: f64,
    kinds: &[ConnectionKind],
    specs: &[&IdentitySpec],
) -> Result<SuiteReport, VerifyError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(VerifyError::InvalidArgument(format!("tolerance must be positive and finite, got {tol}")));
    }
    if let Some(p) = points.iter().find(|p| p.x.len() != def.dim || p.y.len() != def.dim) {
        return Err(VerifyError::InvalidArgument(format!(
            "point of dimension {} for a {}-dimensional Lagrangian",
            p.x.len(),
            def.dim
        )));
    }
    let def = suite_def(def);
    let tdef = diffeo::transformed(&def);

    // One row of residuals per point, or the reason the point failed.
    let rows: Vec<Result<(Vec<f64>, f64), GeometryError>> = points
        .par_iter()
        .map(|p| {
            let ctx = Ctx::new(&def, &tdef, p)?;
            let cond = ctx.geo.metric.cond;
            Ok((specs.iter().map(|s| s.eval(&ctx, kinds)).collect(), cond))
        })
        .collect();

    let point_errors = rows
        .iter()
        .enumerate()
        .filter_map(|(index, r)| {
            r.as_ref().err().map(|e| PointError { index, point: points[index].clone(), error: e.clone() })
        })
        .collect();

    let identities = specs
        .iter()
        .enumerate()
        .map(|(col, spec)| {
            let skipped = spec.active_kinds(kinds).is_empty();
            let mut max = 0.0f64;
            let mut total = 0.0;
            let mut argmax = None;
            let mut failures = 0;
            for (i, row) in rows.iter().enumerate() {
                let r = match row {
                    Ok((vals, _)) => vals[col],
                    Err(_) => f64::INFINITY,
                };
                if r.is_infinite() {
                    failures += 1;
                }
                total += r;
                if argmax.is_none() || r > max {
                    max = r;
                    argmax = Some(i);
                }
            }
            let evaluated = rows.len();
            let status = if skipped {
                Status::Skipped
            } else if max <= tol {
                Status::Pass
            } else {
                Status::Fail
            };
            let argmax_cond = argmax.and_then(|i| rows[i].as_ref().ok().map(|(_, c)| *c));
            IdentityReport {
                id: spec.id,
                statement: spec.statement,
                status,
                max: if skipped { 0.0 } else { max },
                mean: if skipped || evaluated == 0 { 0.0 } else { total / evaluated as f64 },
                argmax: if skipped { None } else { argmax },
                argmax_point: if skipped { None } else { argmax.map(|i| points[i].clone()) },
                argmax_cond: if skipped { None } else { argmax_cond },
                evaluated: if skipped { 0 } else { evaluated },
                failures: if skipped { 0 } else { failures },
            }
        })
        .collect();

    Ok(SuiteReport { tol, samples: points.len(), kinds: kinds.to_vec(), identities, point_errors })
}

/// The residual of one identity at one point, as the suite computes it.
pub fn evaluate(
    def: &LagrangianDef,
    id: &str,
    point: &TangentPoint,
    kinds: &[ConnectionKind],
) -> Result<f64, VerifyError> {
    let spec = lookup(id)?;
    let def = suite_def(def);
    let tdef = diffeo::transformed(&def);
    let ctx = Ctx::new(&def, &tdef, point)?;
    Ok(spec.eval(&ctx, kinds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_statements_present() {
        let all = list_identities();
        assert!(all.len() >= 40);
        let mut ids: Vec<_> = all.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), all.len());
        assert!(all.iter().all(|s| !s.statement.is_empty() && !s.scope.is_empty()));
    }

    #[test]
    fn unknown_identity() {
        assert_eq!(lookup("nope").unwrap_err(), VerifyError::UnknownIdentity("nope".into()));
    }
}

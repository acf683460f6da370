//! Sample-based classification of a space.
//!
//! Each criterion is a tensor that vanishes identically on the class in
//! question. Verdicts are relative to the sample: "holds" means the tensor
//! was below threshold at every sampled point, nothing more.

use rayon::prelude::*;

use crate::error::{ClassifyError, GeometryError};
use crate::geometry::PointGeometry;
use crate::lagrangian::{LagrangianDef, TangentPoint};
use crate::sampling::{sample_points, SampleBox};
use crate::verify::defect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// `C ≡ 0`.
    PseudoRiemannian,
    /// `𝒢^i_jkl ≡ 0`.
    Berwald,
    /// `L_ijk ≡ 0`.
    Landsberg,
    /// `I ≡ 0`.
    WeaklyRiemannian,
    /// `E ≡ 0`.
    WeaklyBerwald,
    /// `J ≡ 0`.
    WeaklyLandsberg,
    /// `𝒢^i_jkl ≡ 0` and `R ≡ 0` jointly.
    LocallyMinkowski,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::PseudoRiemannian,
        Criterion::Berwald,
        Criterion::Landsberg,
        Criterion::WeaklyRiemannian,
        Criterion::WeaklyBerwald,
        Criterion::WeaklyLandsberg,
        Criterion::LocallyMinkowski,
    ];

    /// `(stronger, weaker)`: whenever the first holds, so must the second.
    pub const IMPLICATIONS: [(Criterion, Criterion); 7] = [
        (Criterion::PseudoRiemannian, Criterion::Berwald),
        (Criterion::Berwald, Criterion::Landsberg),
        (Criterion::Berwald, Criterion::WeaklyBerwald),
        (Criterion::Landsberg, Criterion::WeaklyLandsberg),
        (Criterion::WeaklyRiemannian, Criterion::WeaklyLandsberg),
        (Criterion::WeaklyRiemannian, Criterion::WeaklyBerwald),
        (Criterion::LocallyMinkowski, Criterion::Berwald),
    ];

    pub fn id(self) -> &'static str {
        match self {
            Criterion::PseudoRiemannian => "pseudo-riemannian",
            Criterion::Berwald => "berwald",
            Criterion::Landsberg => "landsberg",
            Criterion::WeaklyRiemannian => "weakly-riemannian",
            Criterion::WeaklyBerwald => "weakly-berwald",
            Criterion::WeaklyLandsberg => "weakly-landsberg",
            Criterion::LocallyMinkowski => "locally-minkowski",
        }
    }

    /// The tensor condition, as a formula.
    pub fn condition(self) -> &'static str {
        match self {
            Criterion::PseudoRiemannian => "C_ijk = 0",
            Criterion::Berwald => "𝒢^i_jkl = 0",
            Criterion::Landsberg => "L_ijk = 0",
            Criterion::WeaklyRiemannian => "I_k = 0",
            Criterion::WeaklyBerwald => "E_ij = 0",
            Criterion::WeaklyLandsberg => "J_k = 0",
            Criterion::LocallyMinkowski => "𝒢^i_jkl = 0 and R^i_jk = 0",
        }
    }

    pub fn from_id(id: &str) -> Option<Criterion> {
        Criterion::ALL.into_iter().find(|c| c.id() == id)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// A criterion holds when the residual stays at or below this everywhere.
    pub holds: f64,
    /// A criterion fails when the residual reaches this somewhere.
    pub fails: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { holds: 1e-8, fails: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub max: f64,
    pub verdict: Verdict,
    /// The sample index and point of the largest residual.
    pub witness: Option<(usize, TangentPoint)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleDescriptor {
    pub count: usize,
    pub seed: u64,
    pub bx: SampleBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub samples: SampleDescriptor,
    pub thresholds: Thresholds,
    pub criteria: Vec<CriterionReport>,
    /// Condition number of `g` at every sample, `None` where it was skipped.
    pub point_cond: Vec<Option<f64>>,
    /// Samples at which the geometry could not be evaluated.
    pub skipped: Vec<(usize, GeometryError)>,
}

impl Classification {
    pub fn get(&self, c: Criterion) -> &CriterionReport {
        &self.criteria[c.slot()]
    }

    pub fn verdict(&self, c: Criterion) -> Verdict {
        self.get(c).verdict
    }

    /// Samples that contributed to the verdicts.
    pub fn used(&self) -> usize {
        self.samples.count - self.skipped.len()
    }

    /// Pairs `(a, b)` where `a` holds but `b` fails.
    pub fn chain_violations(&self) -> Vec<(Criterion, Criterion)> {
        Criterion::IMPLICATIONS
            .into_iter()
            .filter(|&(a, b)| self.verdict(a) == Verdict::Holds && self.verdict(b) == Verdict::Fails)
            .collect()
    }
}

/// Residuals of all criteria at one point, in [`Criterion::ALL`] order.
pub fn criterion_residuals(def: &LagrangianDef, p: &TangentPoint) -> Result<([f64; 7], f64), GeometryError> {
    let geo = PointGeometry::new(def, p)?;
    let b3 = geo.berwald_curvature.value()?;
    let flat = defect(std::slice::from_ref(&b3)).max(defect(&[geo.curvature.value()?]));
    let res = [
        defect(&[geo.cartan.value()?]),
        defect(&[b3]),
        defect(&[geo.landsberg.value()?]),
        defect(&[geo.mean_cartan.value()?]),
        defect(&[geo.mean_berwald.value()?]),
        defect(&[geo.mean_landsberg.value()?]),
        flat,
    ];
    Ok((res, geo.metric.cond))
}

/// Residual of one criterion at one point, as [`classify_space`] computes it.
pub fn criterion_residual(def: &LagrangianDef, c: Criterion, p: &TangentPoint) -> Result<f64, GeometryError> {
    Ok(criterion_residuals(def, p)?.0[c.slot()])
}

pub fn classify_space(
    def: &LagrangianDef,
    count: usize,
    seed: u64,
    bx: SampleBox,
    thresholds: Thresholds,
) -> Result<Classification, ClassifyError> {
    if count == 0 {
        return Err(ClassifyError::InvalidArgument("at least one sample is needed".into()));
    }
    let pos = |v: f64| v > 0.0 && v.is_finite();
    if !pos(thresholds.holds) || !pos(thresholds.fails) || thresholds.fails < thresholds.holds {
        return Err(ClassifyError::InvalidArgument(format!(
            "thresholds must satisfy 0 < holds <= fails, got {} and {}",
            thresholds.holds, thresholds.fails
        )));
    }
    let points = sample_points(def.dim, count, seed, bx);
    let rows: Vec<_> = points.par_iter().map(|p| criterion_residuals(def, p)).collect();

    let mut skipped = Vec::new();
    let mut point_cond = Vec::with_capacity(count);
    for (i, r) in rows.iter().enumerate() {
        match r {
            Ok((_, cond)) => point_cond.push(Some(*cond)),
            Err(e) => {
                point_cond.push(None);
                skipped.push((i, e.clone()));
            }
        }
    }
    if skipped.len() * 5 > count || skipped.len() == count {
        return Err(ClassifyError::TooManySkipped { skipped: skipped.len(), total: count });
    }

    let criteria = Criterion::ALL
        .into_iter()
        .map(|c| {
            let mut max = 0.0f64;
            let mut witness = None;
            for (i, r) in rows.iter().enumerate() {
                if let Ok((res, _)) = r {
                    let v = if res[c.slot()].is_nan() { f64::INFINITY } else { res[c.slot()] };
                    if witness.is_none() || v > max {
                        max = v;
                        witness = Some(i);
                    }
                }
            }
            let verdict = if max <= thresholds.holds {
                Verdict::Holds
            } else if max >= thresholds.fails {
                Verdict::Fails
            } else {
                Verdict::Inconclusive
            };
            CriterionReport { criterion: c, max, verdict, witness: witness.map(|i| (i, points[i].clone())) }
        })
        .collect();

    let report = Classification {
        samples: SampleDescriptor { count, seed, bx },
        thresholds,
        criteria,
        point_cond,
        skipped,
    };
    // Every implication is a theorem, so a violation means the numerics are wrong.
    if let Some((a, b)) = report.chain_violations().first() {
        return Err(ClassifyError::Implication(format!("{} => {}", a.id(), b.id())));
    }
    Ok(report)
}

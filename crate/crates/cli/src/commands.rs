use std::fs;
use std::io::Write;
use std::path::Path;

use finsler_core::classify::{classify_space, Thresholds};
use finsler_core::curvature::{curvature_from, landsberg_from, torsion_from};
use finsler_core::geodesic::{
    integrate_geodesic, transport, write_geodesic_csv, write_transport_csv, Path as TransportPath, StepControl,
    TransportKind,
};
use finsler_core::sampling::{sample_points, SampleBox};
use finsler_core::spray::triple_from;
use finsler_core::verify::{run_selected, run_suite_kinds, Status};
use finsler_core::{
    ClassifyError, ConnectionKind, GeodesicError, GeometryError, LagrangianDef, PointGeometry, TangentPoint, VerifyError,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::{num, nums, put_tensor, to_text};
use crate::{ClassifyArgs, Common, GeodesicArgs, PointArgs, SampleArgs, TensorsArgs, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        if e.is_pointwise() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Geometry(g) => g.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::InvalidArgument(_) => CliError::Input(e.to_string()),
            ClassifyError::Geometry(g) => g.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<GeodesicError> for CliError {
    fn from(e: GeodesicError) -> Self {
        match e {
            GeodesicError::InvalidArgument(_) => CliError::Input(e.to_string()),
            GeodesicError::Geometry(g) => g.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

type Outcome = Result<u8, CliError>;

struct Loaded {
    def: LagrangianDef,
    header: Value,
}

fn load(common: &Common) -> Result<(LagrangianDef, String), CliError> {
    let path = &common.def;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let def = LagrangianDef::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok((def, hash))
}

fn with_header(common: &Common, command: &str, config: Value) -> Result<Loaded, CliError> {
    let (def, hash) = load(common)?;
    let header = json!({
        "tool": "finsler",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "definition": {
            "path": common.def.display().to_string(),
            "sha256": hash,
            "name": def.name,
            "dim": def.dim,
        },
        "config": config,
    });
    Ok(Loaded { def, header })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|part| {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("--{flag}: {part:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Input(format!("--{flag}: {part:?} is not finite")))
            }
        })
        .collect()
}

fn parse_point(args: &PointArgs) -> Result<TangentPoint, CliError> {
    let x = parse_list("x", &args.x)?;
    let y = parse_list("y", &args.y)?;
    if x.len() != y.len() {
        return Err(CliError::Input(format!("--x has {} components, --y has {}", x.len(), y.len())));
    }
    Ok(TangentPoint::new(x, y))
}

fn check_dim(def: &LagrangianDef, flag: &str, len: usize) -> Result<(), CliError> {
    if len == def.dim {
        Ok(())
    } else {
        Err(CliError::Input(format!("--{flag} has {len} components, the definition has dimension {}", def.dim)))
    }
}

fn parse_kinds(names: &[String]) -> Result<Vec<ConnectionKind>, CliError> {
    if names.is_empty() {
        return Ok(ConnectionKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for name in names {
        let k: ConnectionKind = name.parse().map_err(|_| {
            let known: Vec<_> = ConnectionKind::ALL.iter().map(|k| k.name()).collect();
            CliError::Input(format!("--kind: unknown connection {name:?}, expected one of {}", known.join(", ")))
        })?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    Ok(kinds)
}

fn parse_sampling(s: &SampleArgs, min: usize) -> Result<SampleBox, CliError> {
    if s.samples < min {
        return Err(CliError::Input(format!("--samples must be at least {min}")));
    }
    match &s.bx {
        None => Ok(SampleBox::DEFAULT),
        Some(text) => {
            let v = parse_list("box", text)?;
            match v[..] {
                [lo, hi] => SampleBox::new(lo, hi).ok_or_else(|| CliError::Input("--box needs lo < hi".into())),
                _ => Err(CliError::Input("--box takes exactly two numbers, lo,hi".into())),
            }
        }
    }
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("--{flag} must be positive and finite, got {v}")))
    }
}

fn point_json(p: &TangentPoint) -> Value {
    json!({"x": nums(&p.x), "y": nums(&p.y)})
}

fn kind_names(kinds: &[ConnectionKind]) -> Value {
    json!(kinds.iter().map(|k| k.name()).collect::<Vec<_>>())
}

pub fn tensors(a: &TensorsArgs) -> Outcome {
    let p = parse_point(&a.point)?;
    let kinds = parse_kinds(&a.kinds)?;
    let config = json!({"x": nums(&p.x), "y": nums(&p.y), "kinds": kind_names(&kinds)});
    let Loaded { def, header } = with_header(&a.common, "tensors", config)?;
    check_dim(&def, "x", p.x.len())?;

    let geo = PointGeometry::new(&def, &p)?;
    let mut data = Map::new();
    let mut shapes = Map::new();
    let l = landsberg_from(&geo)?;
    for (name, t) in [
        ("g", &geo.g),
        ("g_inv", &geo.g_inv),
        ("C", &geo.cartan),
        ("I", &geo.mean_cartan),
        ("G", &geo.spray),
        ("N", &geo.nonlinear),
        ("G2", &geo.berwald),
        ("G3", &geo.berwald_curvature),
        ("Gamma", &geo.chern),
        ("R", &geo.curvature),
    ] {
        put_tensor(&mut data, &mut shapes, name, &t.value().map_err(GeometryError::from)?);
    }
    put_tensor(&mut data, &mut shapes, "Landsberg", &l.l3);
    put_tensor(&mut data, &mut shapes, "J", &l.j);
    put_tensor(&mut data, &mut shapes, "E", &l.e);

    let mut per_kind = Map::new();
    for kind in &kinds {
        let t = triple_from(&geo, *kind)?;
        let c = curvature_from(&geo, *kind)?;
        let tor = torsion_from(&geo, &geo.connection(*kind))?;
        let mut kd = Map::new();
        let mut ks = Map::new();
        for (name, tensor) in [
            ("H", &t.h),
            ("V", &t.v),
            ("R_HH", &c.rhh),
            ("R_VH", &c.rvh),
            ("R_VV", &c.rvv),
            ("T_hor_HH", &tor.hor_hh),
            ("T_hor_VH", &tor.hor_vh),
            ("T_ver_VV", &tor.ver_vv),
            ("T_ver_VH", &tor.ver_vh),
            ("T_ver_HH", &tor.ver_hh),
        ] {
            put_tensor(&mut kd, &mut ks, name, tensor);
        }
        per_kind.insert(
            kind.name().into(),
            json!({"tensors": kd, "shapes": ks, "regularity_det": num(t.regular_det)}),
        );
    }

    let m = &geo.metric;
    let doc = json!({
        "header": header,
        "point": point_json(&p),
        "scalars": {
            "L": num(geo.l.value().map_err(GeometryError::from)?),
            "det_g": num(m.det),
            "cond_g": num(m.cond),
            "signature": [m.signature.0, m.signature.1],
            "landsberg_route_spread": num(l.route_spread),
        },
        "tensors": data,
        "shapes": shapes,
        "kinds": per_kind,
    });
    emit(a.common.out.as_deref(), &to_text(&doc))?;
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let tol = positive("tol", a.tol)?;
    let bx = parse_sampling(&a.sample, 1)?;
    let kinds = parse_kinds(&a.kinds)?;
    let config = json!({
        "samples": a.sample.samples,
        "seed": a.sample.seed,
        "box": [num(bx.lo), num(bx.hi)],
        "tol": num(tol),
        "kinds": kind_names(&kinds),
        "identities": a.identities,
    });
    let Loaded { def, header } = with_header(&a.common, "verify", config)?;
    let points = sample_points(def.dim, a.sample.samples, a.sample.seed, bx);
    let rep = if a.identities.is_empty() {
        run_suite_kinds(&def, &points, tol, &kinds)?
    } else {
        let ids: Vec<&str> = a.identities.iter().map(String::as_str).collect();
        run_selected(&def, &points, tol, &kinds, &ids)?
    };

    let count = |s: Status| rep.identities.iter().filter(|r| r.status == s).count();
    let identities: Vec<Value> = rep
        .identities
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "statement": r.statement,
                "status": r.status.as_str(),
                "max": num(r.max),
                "mean": num(r.mean),
                "argmax": r.argmax,
                "argmax_point": r.argmax_point.as_ref().map(point_json),
                "argmax_cond": r.argmax_cond.map(num),
                "evaluated": r.evaluated,
                "failures": r.failures,
            })
        })
        .collect();
    let point_errors: Vec<Value> = rep
        .point_errors
        .iter()
        .map(|e| json!({"index": e.index, "point": point_json(&e.point), "error": e.error.to_string()}))
        .collect();
    let all_pass = rep.all_pass();
    let doc = json!({
        "header": header,
        "summary": {
            "identities": rep.identities.len(),
            "pass": count(Status::Pass),
            "fail": count(Status::Fail),
            "skipped": count(Status::Skipped),
            "all_pass": all_pass,
        },
        "identities": identities,
        "point_errors": point_errors,
    });
    emit(a.common.out.as_deref(), &to_text(&doc))?;
    for r in rep.failed() {
        eprintln!("finsler: identity {} failed, max residual {:.3e}", r.id, r.max);
    }
    Ok(if all_pass { 0 } else { 1 })
}

pub fn classify(a: &ClassifyArgs) -> Outcome {
    let bx = parse_sampling(&a.sample, 1)?;
    let thresholds = Thresholds { holds: positive("holds", a.holds)?, fails: positive("fails", a.fails)? };
    if thresholds.fails < thresholds.holds {
        return Err(CliError::Input("--fails must not be below --holds".into()));
    }
    let config = json!({
        "samples": a.sample.samples,
        "seed": a.sample.seed,
        "box": [num(bx.lo), num(bx.hi)],
        "holds": num(thresholds.holds),
        "fails": num(thresholds.fails),
    });
    let Loaded { def, header } = with_header(&a.common, "classify", config)?;
    let rep = classify_space(&def, a.sample.samples, a.sample.seed, bx, thresholds)?;

    let mut criteria = Map::new();
    for r in &rep.criteria {
        criteria.insert(
            r.criterion.id().into(),
            json!({
                "condition": r.criterion.condition(),
                "max": num(r.max),
                "verdict": r.verdict.as_str(),
                "witness": r.witness.as_ref().map(|(i, p)| json!({"index": i, "point": point_json(p)})),
            }),
        );
    }
    let doc = json!({
        "header": header,
        "scope": format!("verdicts hold on {} samples", rep.used()),
        "samples": {"count": rep.samples.count, "used": rep.used(), "skipped": rep.skipped.len()},
        "criteria": criteria,
        "point_cond": rep.point_cond.iter().map(|c| c.map(num)).collect::<Vec<_>>(),
        "skipped": rep.skipped.iter().map(|(i, e)| json!({"index": i, "error": e.to_string()})).collect::<Vec<_>>(),
    });
    emit(a.common.out.as_deref(), &to_text(&doc))?;
    Ok(0)
}

pub fn geodesic(a: &GeodesicArgs) -> Outcome {
    let p = parse_point(&a.point)?;
    let t_end = positive("t", a.t)?;
    if a.samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    let ctrl = StepControl { rtol: positive("rtol", a.rtol)?, atol: positive("atol", a.atol)?, ..StepControl::default() };
    let v0 = a.transport.as_deref().map(|s| parse_list("transport", s)).transpose()?;
    let (def, _) = load(&a.common)?;
    check_dim(&def, "x", p.x.len())?;

    let mut out = Vec::new();
    match v0 {
        None => {
            let tr = integrate_geodesic(&def, &p, t_end, a.samples, &ctrl)?;
            write_geodesic_csv(&mut out, &tr).expect("writing to memory cannot fail");
            if tr.relative_drift() > 1e-8 {
                eprintln!("finsler: energy drift {:.3e} relative to L0", tr.relative_drift());
            }
        }
        Some(v0) => {
            check_dim(&def, "transport", v0.len())?;
            let kind = if a.flip { TransportKind::Flip } else { TransportKind::Parallel };
            let path = TransportPath::Geodesic { start: p, t_end };
            let tr = transport(&def, &path, &v0, kind, a.samples, &ctrl)?;
            write_transport_csv(&mut out, &tr).expect("writing to memory cannot fail");
        }
    }
    emit(a.common.out.as_deref(), &String::from_utf8(out).expect("CSV is ASCII"))?;
    Ok(0)
}

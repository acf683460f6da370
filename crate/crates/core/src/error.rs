use thiserror::Error;

/// Failures of jet arithmetic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets have incompatible shapes")]
    SpecMismatch,
    #[error("derivative of order {requested:?} requested, jet is exact only to {valid:?}")]
    OrderOverflow { requested: (i32, i32), valid: (i32, i32) },
    #[error("domain error: {0}")]
    Domain(String),
}

/// A syntax or consistency error in a definition file.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Failures while evaluating geometric quantities at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("direction vector too small (|y| = {norm:.3e})")]
    SmallDirection { norm: f64 },
    #[error("degenerate fundamental tensor (condition number {cond:.3e})")]
    Degenerate { cond: f64 },
    #[error("Lagrangian is not 2-homogeneous in y (relative residual {residual:.3e})")]
    Homogeneity { residual: f64 },
    #[error("Randers one-form too large (|b|_a = {norm:.6})")]
    RandersNorm { norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl GeometryError {
    /// True for errors caused by the sampling point rather than by the definition.
    pub fn is_pointwise(&self) -> bool {
        !matches!(self, GeometryError::Dimension(_) | GeometryError::InvalidArgument(_))
    }
}

/// Failures of geodesic and transport integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("at t = {t}: {source}")]
    Point { t: f64, source: GeometryError },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Failures of the identity suite driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Failures of the classifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("{skipped} of {total} sample points were unusable")]
    TooManySkipped { skipped: usize, total: usize },
    #[error("internal error: verdicts contradict the implication {0}")]
    Implication(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

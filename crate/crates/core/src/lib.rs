//! Numerical pseudo-Finsler geometry on coordinate patches.
//!
//! A Lagrangian `L(x, y)`, 2-homogeneous in the direction `y`, is expanded in
//! truncated Taylor jets at a tangent point. Every tensor of the theory is then
//! obtained by exact differentiation of those jets.

// `!(a <= b)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod curvature;
pub mod diffeo;
pub mod error;
pub mod expr;
pub mod fd;
pub mod geodesic;
pub mod geometry;
pub mod jet;
pub mod lagrangian;
pub mod linalg;
pub mod sampling;
pub mod spray;
pub mod tensor;
pub mod verify;

pub use error::{ClassifyError, GeodesicError, GeometryError, JetError, ParseError, VerifyError};
pub use geometry::{ConnectionKind, PointGeometry};
pub use jet::{Jet, JetSpec};
pub use lagrangian::{EvalOptions, LagrangianDef, TangentPoint};
pub use tensor::Tensor;

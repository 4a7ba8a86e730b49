//! Linear and cubic spline interpolation of curves on embedded Riemannian
//! manifolds, with the tooling to measure how fast the interpolants converge.

// `!(a <= b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod euclidean;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod jacobi;
pub mod manifold;
pub mod solver;

pub use curve::{DiscreteCurve, LpNorm, VectorFieldAlongCurve};
pub use error::{Error, Result};
pub use manifold::{Manifold, ManifoldPoint, TangentVector};
pub use solver::SolveStats;

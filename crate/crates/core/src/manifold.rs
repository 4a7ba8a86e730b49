//! Closed-form Riemannian manifolds in embedding coordinates.
//!
//! Three backends are supported: flat `euclidean:<n>`, the unit sphere
//! `sphere:<n>` embedded in R^{n+1}, and hyperbolic space `hyperbolic:<n>` in
//! the hyperboloid model `<x,x>_M = -1, x_0 > 0` with the Minkowski form of
//! signature (-,+,...,+).
//!
//! The raw kernels (`*_raw`) operate on ambient coordinate slices and are
//! generic over [`Scalar`] so that the solver can push forward-mode dual
//! numbers through `log` and parallel transport. The typed API on
//! [`ManifoldPoint`] and [`TangentVector`] checks preconditions and keeps the
//! constraint surfaces satisfied to 1e-12.
//!
//! Curvature follows `Rm(x,y)z = D_x D_y z - D_y D_x z - D_[x,y] z`, so the unit
//! sphere has `Rm(x,y)z = <y,z>x - <x,z>y`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_dual::DualNum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real scalars the geometric kernels can be evaluated with: `f64` and the
/// forward-mode dual numbers used for Jacobians.
pub trait Scalar: DualNum<Primitive = f64> + Copy {}

impl<T: DualNum<Primitive = f64> + Copy> Scalar for T {}

/// Sphere operations refuse pairs closer than this to antipodal.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

/// Tolerance used when comparing base points and checking constraints.
pub const BASE_TOL: f64 = 1e-12;

// Below this argument the trigonometric ratios switch to their Taylor series,
// which keeps dual-number derivatives finite at coincident points.
const SERIES_CUTOFF: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Manifold {
    Euclidean { dim: usize },
    Sphere { dim: usize },
    Hyperbolic { dim: usize },
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            Manifold::Sphere { dim } => write!(f, "sphere:{dim}"),
            Manifold::Hyperbolic { dim } => write!(f, "hyperbolic:{dim}"),
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, dim) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("manifold id `{s}` is not of the form <kind>:<dim>")))?;
        let dim: usize = dim
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("manifold id `{s}` has an invalid dimension")))?;
        if dim == 0 {
            return Err(Error::config(format!("manifold id `{s}` has dimension 0")));
        }
        match kind.trim() {
            "euclidean" => Ok(Manifold::Euclidean { dim }),
            "sphere" => Ok(Manifold::Sphere { dim }),
            "hyperbolic" => Ok(Manifold::Hyperbolic { dim }),
            other => Err(Error::config(format!("unknown manifold kind `{other}`"))),
        }
    }
}

impl TryFrom<String> for Manifold {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Manifold> for String {
    fn from(m: Manifold) -> String {
        m.to_string()
    }
}

impl Manifold {
    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { dim } | Manifold::Sphere { dim } | Manifold::Hyperbolic { dim } => dim,
        }
    }

    /// Length of the coordinate vectors.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { dim } => dim,
            Manifold::Sphere { dim } | Manifold::Hyperbolic { dim } => dim + 1,
        }
    }

    /// Constant sectional curvature of the backend.
    pub fn curvature_sign(&self) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => 1.0,
            Manifold::Hyperbolic { .. } => -1.0,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self {
            Manifold::Sphere { .. } => PI,
            _ => f64::INFINITY,
        }
    }

    /// Largest distance accepted by `log` and `transport`.
    pub fn max_log_distance(&self) -> f64 {
        match self {
            Manifold::Sphere { .. } => PI - CUT_LOCUS_MARGIN,
            _ => f64::INFINITY,
        }
    }

    /// The ambient bilinear form: Euclidean dot product, or the Minkowski form
    /// for the hyperboloid.
    pub fn dot<T: Scalar>(&self, a: &[T], b: &[T]) -> T {
        let mut acc = a[0] * b[0];
        if let Manifold::Hyperbolic { .. } = self {
            acc = -acc;
        }
        for (x, y) in a[1..].iter().zip(&b[1..]) {
            acc += *x * *y;
        }
        acc
    }

    /// Tangent projection at `x` (metric-orthogonal for the hyperboloid).
    pub fn project_raw<T: Scalar>(&self, x: &[T], a: &[T]) -> Vec<T> {
        match self {
            Manifold::Euclidean { .. } => a.to_vec(),
            Manifold::Sphere { .. } => {
                let c = self.dot(x, a);
                a.iter().zip(x).map(|(ai, xi)| *ai - c * *xi).collect()
            }
            Manifold::Hyperbolic { .. } => {
                let c = self.dot(x, a);
                a.iter().zip(x).map(|(ai, xi)| *ai + c * *xi).collect()
            }
        }
    }

    pub fn exp_raw<T: Scalar>(&self, x: &[T], v: &[T]) -> Vec<T> {
        let s = self.dot(v, v);
        let (c, sc) = match self {
            Manifold::Euclidean { .. } => return x.iter().zip(v).map(|(a, b)| *a + *b).collect(),
            Manifold::Sphere { .. } => cos_sinc(s, 1.0),
            Manifold::Hyperbolic { .. } => cos_sinc(s, -1.0),
        };
        x.iter().zip(v).map(|(xi, vi)| c * *xi + sc * *vi).collect()
    }

    /// Riemannian logarithm without cut-locus checks.
    pub fn log_raw<T: Scalar>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let d: Vec<T> = y.iter().zip(x).map(|(a, b)| *a - *b).collect();
        let kappa = match self {
            Manifold::Euclidean { .. } => return d,
            Manifold::Sphere { .. } => 1.0,
            Manifold::Hyperbolic { .. } => -1.0,
        };
        let z = self.dot(&d, &d) * 0.25;
        let u = self.project_raw(x, &d);
        let scale = theta_over_sin(z, kappa);
        u.into_iter().map(|ui| ui * scale).collect()
    }

    /// Parallel transport of `v` in `T_x` to `T_y` along the connecting geodesic.
    pub fn transport_raw<T: Scalar>(&self, x: &[T], y: &[T], v: &[T]) -> Vec<T> {
        let kappa = match self {
            Manifold::Euclidean { .. } => return v.to_vec(),
            Manifold::Sphere { .. } => 1.0,
            Manifold::Hyperbolic { .. } => -1.0,
        };
        let d: Vec<T> = y.iter().zip(x).map(|(a, b)| *a - *b).collect();
        // 1 + kappa <x,y> rewritten through |y - x|^2 to avoid cancellation.
        let denom = T::from(2.0) - self.dot(&d, &d) * (0.5 * kappa);
        let c = self.dot(y, v) * kappa / denom;
        v.iter().zip(x.iter().zip(y)).map(|(vi, (xi, yi))| *vi - c * (*xi + *yi)).collect()
    }

    pub fn dist_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let q = self.dot(&d, &d).max(0.0);
        match self {
            Manifold::Euclidean { .. } => q.sqrt(),
            Manifold::Sphere { .. } => 2.0 * (0.5 * q.sqrt()).min(1.0).asin(),
            Manifold::Hyperbolic { .. } => 2.0 * (0.5 * q.sqrt()).asinh(),
        }
    }

    /// `Rm(x,y)z` for tangent vectors at a common base point.
    pub fn curvature_raw(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let k = self.curvature_sign();
        let yz = self.dot(y, z);
        let xz = self.dot(x, z);
        x.iter().zip(y).map(|(xi, yi)| k * (yz * xi - xz * yi)).collect()
    }

    /// Pulls ambient coordinates back onto the constraint surface.
    pub fn normalize_raw(&self, p: &mut [f64]) {
        match self {
            Manifold::Euclidean { .. } => {}
            Manifold::Sphere { .. } => {
                let n = norm2(p);
                p.iter_mut().for_each(|x| *x /= n);
            }
            Manifold::Hyperbolic { .. } => {
                let s: f64 = p[1..].iter().map(|x| x * x).sum();
                p[0] = (1.0 + s).sqrt();
            }
        }
    }

    /// Violation of the point constraint, zero for Euclidean space.
    pub fn constraint_error(&self, p: &[f64]) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => (norm2(p) - 1.0).abs(),
            Manifold::Hyperbolic { .. } => {
                let e = (self.dot(p, p) + 1.0).abs();
                if p[0] > 0.0 {
                    e
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// A metric-orthonormal basis of `T_p`, deterministic in `p`.
    pub fn tangent_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let mut candidates: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.project_raw(p, &e)
            })
            .collect();
        candidates.sort_by(|a, b| {
            let na = self.dot(a, a);
            let nb = self.dot(b, b);
            nb.partial_cmp(&na).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.dim());
        for mut c in candidates {
            if basis.len() == self.dim() {
                break;
            }
            // Two passes of Gram-Schmidt for orthogonality to roundoff.
            for _ in 0..2 {
                for b in &basis {
                    let proj = self.dot(&c, b);
                    c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= proj * bi);
                }
            }
            let nrm = self.dot(&c, &c).max(0.0).sqrt();
            if nrm > 1e-6 {
                c.iter_mut().for_each(|x| *x /= nrm);
                basis.push(c);
            }
        }
        basis
    }

    fn check_len(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::contract(format!(
                "{what} has {} coordinates but {self} needs {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        Ok(())
    }
}

/// `(cos sqrt(s), sin sqrt(s)/sqrt(s))` for the sphere, hyperbolic functions
/// for `kappa = -1`.
fn cos_sinc<T: Scalar>(s: T, kappa: f64) -> (T, T) {
    if s.re().abs() < SERIES_CUTOFF {
        let u = s * kappa;
        let c = T::one() - u * (1.0 / 2.0) + u * u * (1.0 / 24.0) - u * u * u * (1.0 / 720.0)
            + u * u * u * u * (1.0 / 40320.0);
        let sc = T::one() - u * (1.0 / 6.0) + u * u * (1.0 / 120.0) - u * u * u * (1.0 / 5040.0)
            + u * u * u * u * (1.0 / 362880.0);
        (c, sc)
    } else {
        let r = s.sqrt();
        if kappa > 0.0 {
            (r.cos(), r.sin() / r)
        } else {
            (r.cosh(), r.sinh() / r)
        }
    }
}

/// `theta / sin(theta)` (or `sinh`) expressed through `z = sin^2(theta/2)`
/// (resp. `sinh^2`).
fn theta_over_sin<T: Scalar>(z: T, kappa: f64) -> T {
    let a = if z.re().abs() < SERIES_CUTOFF {
        let u = z * kappa;
        T::one()
            + u * (1.0 / 6.0)
            + u * u * (3.0 / 40.0)
            + u * u * u * (5.0 / 112.0)
            + u * u * u * u * (35.0 / 1152.0)
            + u * u * u * u * u * (63.0 / 2816.0)
    } else {
        let r = z.sqrt();
        if kappa > 0.0 {
            r.asin() / r
        } else {
            r.asinh() / r
        }
    };
    a / (T::one() - z * kappa).sqrt()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A point on a manifold, stored in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: Vec<f64>,
}

impl ManifoldPoint {
    /// Validates the constraint (to 1e-8) and renormalizes exactly.
    pub fn new(manifold: Manifold, coords: Vec<f64>) -> Result<Self> {
        manifold.check_len(&coords, "point")?;
        let err = manifold.constraint_error(&coords);
        if !(err <= 1e-8) {
            return Err(Error::domain(format!("coordinates are not on {manifold} (constraint error {err:.3e})")));
        }
        Ok(Self::from_raw(manifold, coords))
    }

    /// Takes coordinates produced by a kernel and renormalizes them.
    pub(crate) fn from_raw(manifold: Manifold, mut coords: Vec<f64>) -> Self {
        manifold.normalize_raw(&mut coords);
        Self { manifold, coords }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn same_as(&self, other: &ManifoldPoint) -> bool {
        self.manifold == other.manifold
            && max_abs_diff(&self.coords, &other.coords) <= BASE_TOL * (1.0 + norm2(&self.coords))
    }

    fn ensure_same_manifold(&self, other: &ManifoldPoint) -> Result<()> {
        if self.manifold != other.manifold {
            return Err(Error::contract(format!("points live on {} and {}", self.manifold, other.manifold)));
        }
        Ok(())
    }

    fn ensure_base(&self, v: &TangentVector) -> Result<()> {
        if !self.same_as(&v.base) {
            return Err(Error::contract("tangent vector is not based at this point"));
        }
        Ok(())
    }

    pub fn zero_vector(&self) -> TangentVector {
        TangentVector {
            base: self.clone(),
            vec: vec![0.0; self.coords.len()],
        }
    }

    /// Orthogonal (metric-orthogonal on the hyperboloid) projection of an
    /// ambient vector onto the tangent space. Idempotent.
    pub fn project_tangent(&self, a: &[f64]) -> Result<TangentVector> {
        self.manifold.check_len(a, "ambient vector")?;
        Ok(TangentVector {
            base: self.clone(),
            vec: self.manifold.project_raw(&self.coords, a),
        })
    }

    pub fn tangent_basis(&self) -> Vec<TangentVector> {
        self.manifold
            .tangent_basis(&self.coords)
            .into_iter()
            .map(|vec| TangentVector { base: self.clone(), vec })
            .collect()
    }

    pub fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        self.ensure_base(v)?;
        let n = v.norm();
        if n >= self.manifold.injectivity_radius() {
            return Err(Error::domain(format!("|v| = {n} reaches the injectivity radius of {}", self.manifold)));
        }
        Ok(Self::from_raw(self.manifold, self.manifold.exp_raw(&self.coords, &v.vec)))
    }

    pub fn dist(&self, q: &ManifoldPoint) -> Result<f64> {
        self.ensure_same_manifold(q)?;
        Ok(self.manifold.dist_raw(&self.coords, &q.coords))
    }

    fn ensure_within_log_range(&self, q: &ManifoldPoint) -> Result<()> {
        let d = self.dist(q)?;
        if d > self.manifold.max_log_distance() {
            return Err(Error::domain(format!(
                "points are {d} apart, at or beyond the cut locus of {}",
                self.manifold
            )));
        }
        Ok(())
    }

    pub fn log(&self, q: &ManifoldPoint) -> Result<TangentVector> {
        self.ensure_within_log_range(q)?;
        Ok(TangentVector {
            base: self.clone(),
            vec: self.manifold.log_raw(&self.coords, &q.coords),
        })
    }

    /// Parallel transport of `v` (based here) to `q` along the geodesic.
    pub fn transport_to(&self, q: &ManifoldPoint, v: &TangentVector) -> Result<TangentVector> {
        self.ensure_base(v)?;
        self.ensure_within_log_range(q)?;
        let vec = self.manifold.transport_raw(&self.coords, &q.coords, &v.vec);
        Ok(TangentVector {
            base: q.clone(),
            vec: self.manifold.project_raw(&q.coords, &vec),
        })
    }

    /// Riemann curvature `Rm(x,y)z` at this point.
    pub fn curvature(&self, x: &TangentVector, y: &TangentVector, z: &TangentVector) -> Result<TangentVector> {
        self.ensure_base(x)?;
        self.ensure_base(y)?;
        self.ensure_base(z)?;
        Ok(TangentVector {
            base: self.clone(),
            vec: self.manifold.curvature_raw(&x.vec, &y.vec, &z.vec),
        })
    }
}

/// A base point together with an ambient vector in its tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Checks tangency (to 1e-8 relative) and projects exactly.
    pub fn new(base: ManifoldPoint, vec: Vec<f64>) -> Result<Self> {
        let m = base.manifold;
        m.check_len(&vec, "tangent vector")?;
        let normal = match m {
            Manifold::Euclidean { .. } => 0.0,
            _ => m.dot(&base.coords, &vec).abs(),
        };
        if !(normal <= 1e-8 * (1.0 + norm2(&vec))) {
            return Err(Error::domain(format!("vector is not tangent to {m} (normal component {normal:.3e})")));
        }
        let vec = m.project_raw(&base.coords, &vec);
        Ok(Self { base, vec })
    }

    pub(crate) fn from_raw(base: ManifoldPoint, vec: Vec<f64>) -> Self {
        Self { base, vec }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn inner(&self, w: &TangentVector) -> Result<f64> {
        if !self.base.same_as(&w.base) {
            return Err(Error::contract("inner product of vectors at different base points"));
        }
        Ok(self.base.manifold.dot(&self.vec, &w.vec))
    }

    pub fn norm(&self) -> f64 {
        self.base.manifold.dot(&self.vec, &self.vec).max(0.0).sqrt()
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            vec: self.vec.iter().map(|x| x * s).collect(),
        }
    }

    /// `a*self + b*w` for vectors at the same base point.
    pub fn combine(&self, a: f64, w: &TangentVector, b: f64) -> Result<TangentVector> {
        if !self.base.same_as(&w.base) {
            return Err(Error::contract("linear combination of vectors at different base points"));
        }
        Ok(TangentVector {
            base: self.base.clone(),
            vec: self.vec.iter().zip(&w.vec).map(|(x, y)| a * x + b * y).collect(),
        })
    }
}

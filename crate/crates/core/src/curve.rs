//! Discrete curves on a manifold and covariant calculus along them.
//!
//! A [`DiscreteCurve`] is sampled on a grid that is uniform inside each knot
//! interval. All derivative stencils are second order: centered in the
//! interior of a knot interval, one-sided at its ends, and never reaching
//! across a knot, because spline interpolants are only piecewise smooth.
//! Differences of vector fields are taken after parallel transport along the
//! geodesic joining the two grid nodes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};

/// Exponent of an L^p norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
pub enum LpNorm {
    Finite(f64),
    Infinity,
}

impl LpNorm {
    pub fn label(&self) -> String {
        match self {
            LpNorm::Finite(p) => format!("{p}"),
            LpNorm::Infinity => "inf".to_string(),
        }
    }
}

impl TryFrom<serde_json::Value> for LpNorm {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::Number(n) => match n.as_f64() {
                Some(p) if p >= 1.0 => Ok(LpNorm::Finite(p)),
                _ => Err(format!("norm exponent {n} must be >= 1")),
            },
            serde_json::Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(LpNorm::Infinity)
            }
            other => Err(format!("norm exponent must be a number >= 1 or \"inf\", got {other}")),
        }
    }
}

impl From<LpNorm> for serde_json::Value {
    fn from(p: LpNorm) -> Self {
        match p {
            LpNorm::Finite(p) => serde_json::json!(p),
            LpNorm::Infinity => serde_json::json!("inf"),
        }
    }
}

/// A curve sampled on a strictly increasing grid of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    manifold: Manifold,
    times: Vec<f64>,
    points: Vec<ManifoldPoint>,
    knot_indices: Vec<usize>,
}

impl DiscreteCurve {
    pub fn new(times: Vec<f64>, points: Vec<ManifoldPoint>, knot_indices: Vec<usize>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::contract(format!("{} times but {} points", times.len(), points.len())));
        }
        if times.len() < 2 {
            return Err(Error::contract("a curve needs at least two nodes"));
        }
        if times[0].abs() > 1e-14 || (times[times.len() - 1] - 1.0).abs() > 1e-14 {
            return Err(Error::contract("curve times must start at 0 and end at 1"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::contract("curve times must be strictly increasing"));
        }
        let manifold = points[0].manifold();
        if points.iter().any(|p| p.manifold() != manifold) {
            return Err(Error::contract("all curve points must lie on the same manifold"));
        }
        let last = times.len() - 1;
        if knot_indices.first() != Some(&0)
            || knot_indices.last() != Some(&last)
            || knot_indices.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::contract("knot indices must increase strictly from 0 to the last node"));
        }
        for w in knot_indices.windows(2) {
            let (s, e) = (w[0], w[1]);
            let step = (times[e] - times[s]) / (e - s) as f64;
            for k in s..=e {
                let expect = times[s] + (k - s) as f64 * step;
                if (times[k] - expect).abs() > 1e-9 * step {
                    return Err(Error::contract("grid is not uniform inside a knot interval"));
                }
            }
        }
        Ok(Self {
            manifold,
            times,
            points,
            knot_indices,
        })
    }

    /// Samples `f` on `intervals` knot intervals of `substeps` fine steps each.
    pub fn sample<F>(manifold: Manifold, intervals: usize, substeps: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<ManifoldPoint>,
    {
        let times = uniform_times(intervals, substeps)?;
        let points = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        if points.iter().any(|p| p.manifold() != manifold) {
            return Err(Error::contract("sampled points are not on the requested manifold"));
        }
        let knots = (0..=intervals).map(|i| i * substeps).collect();
        Self::new(times, points, knots)
    }

    pub(crate) fn from_parts_unchecked(
        manifold: Manifold,
        times: Vec<f64>,
        points: Vec<ManifoldPoint>,
        knot_indices: Vec<usize>,
    ) -> Self {
        Self {
            manifold,
            times,
            points,
            knot_indices,
        }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points
    }

    pub fn knot_indices(&self) -> &[usize] {
        &self.knot_indices
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(start, end)` node indices of each knot interval.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.knot_indices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Fine-grid spacing inside the knot interval `[start, end]`.
    pub fn spacing(&self, start: usize, end: usize) -> f64 {
        (self.times[end] - self.times[start]) / (end - start) as f64
    }

    fn min_nodes_per_segment(&self) -> usize {
        self.segments().map(|(s, e)| e - s + 1).min().unwrap_or(0)
    }

    fn require_nodes(&self, needed: usize, what: &str) -> Result<()> {
        let have = self.min_nodes_per_segment();
        if have < needed {
            return Err(Error::config(format!(
                "{what} needs at least {needed} nodes per knot interval, curve has {have}"
            )));
        }
        Ok(())
    }

    fn coords(&self, k: usize) -> &[f64] {
        self.points[k].coords()
    }

    /// Writes `t,x0,...` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.manifold.ambient_dim();
        let header: Vec<String> = std::iter::once("t".to_string()).chain((0..n).map(|i| format!("x{i}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            write!(w, "{t}")?;
            for x in p.coords() {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). The curve
    /// gets a single knot interval unless `knot_indices` is given.
    pub fn read_csv<R: BufRead>(r: R, manifold: Manifold, knot_indices: Option<Vec<usize>>) -> Result<Self> {
        let n = manifold.ambient_dim();
        let rows = read_rows(r, 1 + n)?;
        let mut times = Vec::with_capacity(rows.len());
        let mut points = Vec::with_capacity(rows.len());
        for row in rows {
            times.push(row[0]);
            points.push(ManifoldPoint::new(manifold, row[1..].to_vec())?);
        }
        let knots = knot_indices.unwrap_or_else(|| vec![0, times.len().saturating_sub(1)]);
        Self::new(times, points, knots)
    }
}

pub(crate) fn uniform_times(intervals: usize, substeps: usize) -> Result<Vec<f64>> {
    if intervals == 0 || substeps == 0 {
        return Err(Error::config("a grid needs at least one interval and one substep"));
    }
    let total = intervals * substeps;
    Ok((0..=total).map(|k| k as f64 / total as f64).collect())
}

fn read_rows<R: BufRead>(r: R, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::config(format!("line {}: {e}", lineno + 1)))?;
        if row.len() != width {
            return Err(Error::config(format!(
                "line {}: expected {width} columns, found {}",
                lineno + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One tangent vector per node of a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldAlongCurve {
    vectors: Vec<TangentVector>,
}

impl VectorFieldAlongCurve {
    /// Checks that every vector is based at the matching curve node.
    pub fn new(curve: &DiscreteCurve, vectors: Vec<TangentVector>) -> Result<Self> {
        if vectors.len() != curve.len() {
            return Err(Error::contract(format!(
                "field has {} vectors for a curve of {} nodes",
                vectors.len(),
                curve.len()
            )));
        }
        if vectors.iter().zip(curve.points()).any(|(v, p)| !v.base().same_as(p)) {
            return Err(Error::contract("field base points do not match the curve"));
        }
        Ok(Self { vectors })
    }

    /// Wraps ambient vectors, projecting each onto its tangent space.
    pub(crate) fn from_ambient(curve: &DiscreteCurve, raw: Vec<Vec<f64>>) -> Self {
        let m = curve.manifold();
        let vectors = raw
            .into_iter()
            .zip(curve.points())
            .map(|(v, p)| TangentVector::from_raw(p.clone(), m.project_raw(p.coords(), &v)))
            .collect();
        Self { vectors }
    }

    pub fn vectors(&self) -> &[TangentVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub(crate) fn raw(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.vec().to_vec()).collect()
    }

    /// Largest pointwise norm.
    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().map(TangentVector::norm).fold(0.0, f64::max)
    }

    fn check_on(&self, curve: &DiscreteCurve) -> Result<()> {
        if self.vectors.len() != curve.len()
            || self.vectors.iter().zip(curve.points()).any(|(v, p)| !v.base().same_as(p))
        {
            return Err(Error::contract("vector field is not defined along this curve"));
        }
        Ok(())
    }

    /// Writes `t,x0,...,v0,...` rows.
    pub fn write_csv<W: Write>(&self, curve: &DiscreteCurve, mut w: W) -> Result<()> {
        self.check_on(curve)?;
        let n = curve.manifold().ambient_dim();
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..n).map(|i| format!("x{i}")))
            .chain((0..n).map(|i| format!("v{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, v) in curve.times().iter().zip(&self.vectors) {
            write!(w, "{t}")?;
            for x in v.base().coords().iter().chain(v.vec()) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a field written by [`write_csv`](Self::write_csv) along `curve`.
    pub fn read_csv<R: BufRead>(r: R, curve: &DiscreteCurve) -> Result<Self> {
        let n = curve.manifold().ambient_dim();
        let rows = read_rows(r, 1 + 2 * n)?;
        if rows.len() != curve.len() {
            return Err(Error::contract("field rows do not match the curve length"));
        }
        let vectors = rows
            .into_iter()
            .zip(curve.points())
            .map(|(row, p)| TangentVector::new(p.clone(), row[1 + n..].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(curve, vectors)
    }
}

// ---- segment-local stencils on raw ambient coordinates ----

fn lincomb(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    let mut out = vec![0.0; n];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

/// Second-order velocity on one knot interval.
fn segment_velocity(m: Manifold, pts: &[&[f64]], step: f64) -> Vec<Vec<f64>> {
    let n = pts.len();
    let inv = 1.0 / (2.0 * step);
    (0..n)
        .map(|k| {
            let v = if k == 0 {
                lincomb(&[(4.0, &m.log_raw(pts[0], pts[1])), (-1.0, &m.log_raw(pts[0], pts[2]))])
            } else if k == n - 1 {
                lincomb(&[(-4.0, &m.log_raw(pts[k], pts[k - 1])), (1.0, &m.log_raw(pts[k], pts[k - 2]))])
            } else {
                lincomb(&[(1.0, &m.log_raw(pts[k], pts[k + 1])), (-1.0, &m.log_raw(pts[k], pts[k - 1]))])
            };
            let v: Vec<f64> = v.into_iter().map(|x| x * inv).collect();
            m.project_raw(pts[k], &v)
        })
        .collect()
}

/// Second-order covariant derivative of a field on one knot interval.
fn segment_derivative(m: Manifold, pts: &[&[f64]], field: &[Vec<f64>], step: f64) -> Vec<Vec<f64>> {
    let n = pts.len();
    let inv = 1.0 / (2.0 * step);
    let to = |from: usize, k: usize| m.transport_raw(pts[from], pts[k], &field[from]);
    (0..n)
        .map(|k| {
            let d = if k == 0 {
                lincomb(&[(-3.0, &field[0]), (4.0, &to(1, 0)), (-1.0, &to(2, 0))])
            } else if k == n - 1 {
                lincomb(&[(3.0, &field[k]), (-4.0, &to(k - 1, k)), (1.0, &to(k - 2, k))])
            } else {
                lincomb(&[(1.0, &to(k + 1, k)), (-1.0, &to(k - 1, k))])
            };
            let d: Vec<f64> = d.into_iter().map(|x| x * inv).collect();
            m.project_raw(pts[k], &d)
        })
        .collect()
}

/// Second-order covariant acceleration on one knot interval, from second
/// differences of `log_{x_k}` of the neighbours.
fn segment_accel(m: Manifold, pts: &[&[f64]], step: f64) -> Vec<Vec<f64>> {
    let n = pts.len();
    let inv = 1.0 / (step * step);
    (0..n)
        .map(|k| {
            let a = if k == 0 {
                lincomb(&[
                    (-5.0, &m.log_raw(pts[0], pts[1])),
                    (4.0, &m.log_raw(pts[0], pts[2])),
                    (-1.0, &m.log_raw(pts[0], pts[3])),
                ])
            } else if k == n - 1 {
                lincomb(&[
                    (-5.0, &m.log_raw(pts[k], pts[k - 1])),
                    (4.0, &m.log_raw(pts[k], pts[k - 2])),
                    (-1.0, &m.log_raw(pts[k], pts[k - 3])),
                ])
            } else {
                lincomb(&[(1.0, &m.log_raw(pts[k], pts[k + 1])), (1.0, &m.log_raw(pts[k], pts[k - 1]))])
            };
            let a: Vec<f64> = a.into_iter().map(|x| x * inv).collect();
            m.project_raw(pts[k], &a)
        })
        .collect()
}

/// Per knot interval: `(start, step, velocity, acceleration)`.
fn segment_kinematics(c: &DiscreteCurve) -> Vec<(usize, f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let m = c.manifold();
    c.segments()
        .map(|(s, e)| {
            let pts: Vec<&[f64]> = (s..=e).map(|k| c.coords(k)).collect();
            let step = c.spacing(s, e);
            (s, step, segment_velocity(m, &pts, step), segment_accel(m, &pts, step))
        })
        .collect()
}

/// Stitches per-segment values into one field, averaging the two one-sided
/// values at interior knots.
fn stitch(c: &DiscreteCurve, parts: impl Iterator<Item = (usize, Vec<Vec<f64>>)>) -> Vec<Vec<f64>> {
    let n = c.manifold().ambient_dim();
    let mut out = vec![vec![0.0; n]; c.len()];
    let mut hits = vec![0u32; c.len()];
    for (s, vals) in parts {
        for (j, v) in vals.into_iter().enumerate() {
            let k = s + j;
            out[k].iter_mut().zip(&v).for_each(|(o, x)| *o += x);
            hits[k] += 1;
        }
    }
    for (o, h) in out.iter_mut().zip(hits) {
        if h > 1 {
            o.iter_mut().for_each(|x| *x /= h as f64);
        }
    }
    out
}

/// Velocity field of the curve.
pub fn velocity(c: &DiscreteCurve) -> Result<VectorFieldAlongCurve> {
    c.require_nodes(3, "velocity")?;
    let m = c.manifold();
    let parts = c.segments().map(|(s, e)| {
        let pts: Vec<&[f64]> = (s..=e).map(|k| c.coords(k)).collect();
        (s, segment_velocity(m, &pts, c.spacing(s, e)))
    });
    let raw = stitch(c, parts.collect::<Vec<_>>().into_iter());
    Ok(VectorFieldAlongCurve::from_ambient(c, raw))
}

/// Covariant derivative `D_t f` along the curve.
pub fn covariant_derivative(c: &DiscreteCurve, f: &VectorFieldAlongCurve) -> Result<VectorFieldAlongCurve> {
    f.check_on(c)?;
    c.require_nodes(3, "covariant derivative")?;
    let m = c.manifold();
    let field = f.raw();
    let parts: Vec<_> = c
        .segments()
        .map(|(s, e)| {
            let pts: Vec<&[f64]> = (s..=e).map(|k| c.coords(k)).collect();
            (s, segment_derivative(m, &pts, &field[s..=e], c.spacing(s, e)))
        })
        .collect();
    Ok(VectorFieldAlongCurve::from_ambient(c, stitch(c, parts.into_iter())))
}

/// Covariant acceleration `D_t^2 c`, computed inside each knot interval.
pub fn accel(c: &DiscreteCurve) -> Result<VectorFieldAlongCurve> {
    c.require_nodes(4, "acceleration")?;
    let parts = segment_kinematics(c).into_iter().map(|(s, _, _, acc)| (s, acc));
    let raw = stitch(c, parts.collect::<Vec<_>>().into_iter());
    Ok(VectorFieldAlongCurve::from_ambient(c, raw))
}

/// `D_t^2 f` from second differences of transported values: centered inside
/// each knot interval, one-sided at its ends.
pub fn covariant_second_derivative(c: &DiscreteCurve, f: &VectorFieldAlongCurve) -> Result<VectorFieldAlongCurve> {
    f.check_on(c)?;
    c.require_nodes(4, "second covariant derivative")?;
    let m = c.manifold();
    let field = f.raw();
    let parts: Vec<_> = c
        .segments()
        .map(|(s, e)| {
            let step = c.spacing(s, e);
            let inv = 1.0 / (step * step);
            let to = |from: usize, k: usize| m.transport_raw(c.coords(from), c.coords(k), &field[from]);
            let vals = (s..=e)
                .map(|k| {
                    let d = if k == s {
                        lincomb(&[(2.0, &field[k]), (-5.0, &to(k + 1, k)), (4.0, &to(k + 2, k)), (-1.0, &to(k + 3, k))])
                    } else if k == e {
                        lincomb(&[(2.0, &field[k]), (-5.0, &to(k - 1, k)), (4.0, &to(k - 2, k)), (-1.0, &to(k - 3, k))])
                    } else {
                        lincomb(&[(1.0, &to(k + 1, k)), (-2.0, &field[k]), (1.0, &to(k - 1, k))])
                    };
                    d.into_iter().map(|x| x * inv).collect::<Vec<f64>>()
                })
                .collect::<Vec<_>>();
            (s, vals)
        })
        .collect();
    Ok(VectorFieldAlongCurve::from_ambient(c, stitch(c, parts.into_iter())))
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// `int_0^1 |D_t^2 c|^2 dt` by composite trapezoid per knot interval.
pub fn cubic_energy(c: &DiscreteCurve) -> Result<f64> {
    c.require_nodes(4, "cubic energy")?;
    let m = c.manifold();
    Ok(segment_kinematics(c)
        .iter()
        .map(|(_, step, _, acc)| {
            let sq: Vec<f64> = acc.iter().map(|a| m.dot(a, a)).collect();
            trapezoid(&sq, *step)
        })
        .sum())
}

/// `int_0^1 |c'|^2 dt` by composite trapezoid per knot interval.
pub fn path_energy(c: &DiscreteCurve) -> Result<f64> {
    c.require_nodes(3, "path energy")?;
    let m = c.manifold();
    Ok(c
        .segments()
        .map(|(s, e)| {
            let pts: Vec<&[f64]> = (s..=e).map(|k| c.coords(k)).collect();
            let step = c.spacing(s, e);
            let sq: Vec<f64> = segment_velocity(m, &pts, step).iter().map(|v| m.dot(v, v)).collect();
            trapezoid(&sq, step)
        })
        .sum())
}

/// Euler-Lagrange residual `D_t^4 c + Rm(D_t^2 c, c') c'` of the cubic spline
/// energy, as `D_t^2` applied twice with centered stencils. Entries within two
/// nodes of a knot are left at zero: there the stencil would straddle the knot.
pub fn el_residual(c: &DiscreteCurve) -> Result<VectorFieldAlongCurve> {
    c.require_nodes(7, "Euler-Lagrange residual")?;
    let m = c.manifold();
    let n = m.ambient_dim();
    let mut out = vec![vec![0.0; n]; c.len()];
    for (s, step, vel, acc) in segment_kinematics(c) {
        let inv = 1.0 / (step * step);
        for j in 2..vel.len() - 2 {
            let (x, l, r) = (c.coords(s + j), c.coords(s + j - 1), c.coords(s + j + 1));
            let fourth = lincomb(&[
                (inv, &m.transport_raw(r, x, &acc[j + 1])),
                (-2.0 * inv, &acc[j]),
                (inv, &m.transport_raw(l, x, &acc[j - 1])),
            ]);
            let rm = m.curvature_raw(&acc[j], &vel[j], &vel[j]);
            out[s + j] = fourth.iter().zip(&rm).map(|(a, b)| a + b).collect();
        }
    }
    Ok(VectorFieldAlongCurve::from_ambient(c, out))
}

/// Sup norm of [`el_residual`] over interior nodes of the knot intervals.
pub fn el_residual_norm(c: &DiscreteCurve) -> Result<f64> {
    Ok(el_residual(c)?.sup_norm())
}

/// L^p norm of `t -> d(a(t), b(t))` on the common grid.
pub fn lp_error(a: &DiscreteCurve, b: &DiscreteCurve, p: LpNorm) -> Result<f64> {
    if a.manifold() != b.manifold() {
        return Err(Error::contract("curves live on different manifolds"));
    }
    if a.times().len() != b.times().len() || a.times().iter().zip(b.times()).any(|(x, y)| (x - y).abs() > 1e-14) {
        return Err(Error::contract("curves are sampled on different grids"));
    }
    let m = a.manifold();
    let d: Vec<f64> = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(x, y)| m.dist_raw(x.coords(), y.coords()))
        .collect();
    Ok(match p {
        LpNorm::Infinity => d.iter().copied().fold(0.0, f64::max),
        LpNorm::Finite(p) => {
            let t = a.times();
            let mut acc = 0.0;
            for k in 0..d.len() - 1 {
                acc += 0.5 * (t[k + 1] - t[k]) * (d[k].powf(p) + d[k + 1].powf(p));
            }
            acc.powf(1.0 / p)
        }
    })
}

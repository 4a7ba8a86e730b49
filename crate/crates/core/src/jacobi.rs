//! Interpolation of knot values into a vector field along a curve by solving
//! `D_t^2 w + Rm(w, c') c' = 0` on every knot interval.

use crate::curve::{velocity, DiscreteCurve, VectorFieldAlongCurve};
use crate::error::{Error, Result};
use crate::manifold::TangentVector;
use crate::solver::banded::BandedSpd;

/// One tangent vector per knot of a host curve.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotValues {
    values: Vec<TangentVector>,
}

impl KnotValues {
    pub fn new(curve: &DiscreteCurve, values: Vec<TangentVector>) -> Result<Self> {
        let knots = curve.knot_indices();
        if values.len() != knots.len() {
            return Err(Error::contract(format!(
                "{} knot values for {} knots",
                values.len(),
                knots.len()
            )));
        }
        if values.iter().zip(knots).any(|(v, &k)| !v.base().same_as(&curve.points()[k])) {
            return Err(Error::contract("knot values must be based at the curve's knot points"));
        }
        Ok(Self { values })
    }

    /// Samples a field at the knot nodes.
    pub fn from_field(curve: &DiscreteCurve, field: &VectorFieldAlongCurve) -> Result<Self> {
        if field.len() != curve.len() {
            return Err(Error::contract("field is not defined along this curve"));
        }
        let values = curve.knot_indices().iter().map(|&k| field.vectors()[k].clone()).collect();
        Self::new(curve, values)
    }

    pub fn values(&self) -> &[TangentVector] {
        &self.values
    }

    /// Largest knot value norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(TangentVector::norm).fold(0.0, f64::max)
    }
}

/// Parallel frames along `[s, e]`, each transported from the previous node.
fn transported_frames(c: &DiscreteCurve, s: usize, e: usize) -> Vec<Vec<Vec<f64>>> {
    let m = c.manifold();
    let pts = c.points();
    let mut frames = Vec::with_capacity(e - s + 1);
    frames.push(m.tangent_basis(pts[s].coords()));
    for k in s..e {
        let (x, y) = (pts[k].coords(), pts[k + 1].coords());
        let next = frames[k - s]
            .iter()
            .map(|b| m.project_raw(y, &m.transport_raw(x, y, b)))
            .collect();
        frames.push(next);
    }
    frames
}

/// The field `w` solving the Jacobi-type problem on each knot interval with
/// `w(t_i) = kv_i`.
pub fn jacobi_interpolate(c: &DiscreteCurve, kv: &KnotValues) -> Result<VectorFieldAlongCurve> {
    KnotValues::new(c, kv.values.clone())?;
    let m = c.manifold();
    let d = m.dim();
    let vel = velocity(c)?.raw();
    let mut out = vec![vec![0.0; m.ambient_dim()]; c.len()];
    for (seg, (s, e)) in c.segments().enumerate() {
        let frames = transported_frames(c, s, e);
        let step = c.spacing(s, e);
        let coeffs = |frame: &[Vec<f64>], v: &[f64]| frame.iter().map(|b| m.dot(b, v)).collect::<Vec<f64>>();
        let left = coeffs(&frames[0], kv.values[seg].vec());
        let right = coeffs(&frames[e - s], kv.values[seg + 1].vec());

        let inner = e - s - 1;
        let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(inner);
        if inner > 0 {
            // (-a_{k-1} + 2 a_k - a_{k+1}) - delta^2 R_k a_k = 0
            let mut a = BandedSpd::zeros(inner * d, d);
            let mut rhs = vec![0.0; inner * d];
            for j in 0..inner {
                let k = s + 1 + j;
                let frame = &frames[j + 1];
                for p in 0..d {
                    let rm = m.curvature_raw(&frame[p], &vel[k], &vel[k]);
                    for q in 0..=p {
                        a.add(j * d + p, j * d + q, -step * step * m.dot(&frame[q], &rm));
                    }
                    a.add(j * d + p, j * d + p, 2.0);
                    if j > 0 {
                        a.add(j * d + p, (j - 1) * d + p, -1.0);
                    }
                }
            }
            rhs[..d].iter_mut().zip(&left).for_each(|(r, x)| *r += x);
            let tail = (inner - 1) * d;
            rhs[tail..].iter_mut().zip(&right).for_each(|(r, x)| *r += x);
            let chol = a.cholesky().map_err(|_| {
                Error::domain(format!(
                    "interpolation system on knot interval {seg} is not positive definite: \
                     the interval is too long for the curvature along it"
                ))
            })?;
            let sol = chol.solve(&rhs);
            alpha.extend(sol.chunks(d).map(<[f64]>::to_vec));
        }
        for (j, a) in alpha.iter().enumerate() {
            let k = s + 1 + j;
            let mut w = vec![0.0; m.ambient_dim()];
            for (b, x) in frames[j + 1].iter().zip(a) {
                w.iter_mut().zip(b).for_each(|(o, bi)| *o += x * bi);
            }
            out[k] = w;
        }
        out[s] = kv.values[seg].vec().to_vec();
        out[e] = kv.values[seg + 1].vec().to_vec();
    }
    Ok(VectorFieldAlongCurve::from_ambient(c, out))
}

/// Sup norm of `D_t^2 f + Rm(f, c') c'` over the interior nodes of the knot
/// intervals.
pub fn jacobi_residual(c: &DiscreteCurve, f: &VectorFieldAlongCurve) -> Result<f64> {
    let m = c.manifold();
    let field = f.raw();
    if field.len() != c.len() || f.vectors().iter().zip(c.points()).any(|(v, p)| !v.base().same_as(p)) {
        return Err(Error::contract("field is not defined along this curve"));
    }
    let vel = velocity(c)?.raw();
    let pts = c.points();
    let mut worst: f64 = 0.0;
    for (s, e) in c.segments() {
        let inv = 1.0 / (c.spacing(s, e) * c.spacing(s, e));
        for k in s + 1..e {
            let x = pts[k].coords();
            let l = m.transport_raw(pts[k - 1].coords(), x, &field[k - 1]);
            let r = m.transport_raw(pts[k + 1].coords(), x, &field[k + 1]);
            let rm = m.curvature_raw(&field[k], &vel[k], &vel[k]);
            let res: Vec<f64> = (0..x.len())
                .map(|i| (l[i] - 2.0 * field[k][i] + r[i]) * inv + rm[i])
                .collect();
            worst = worst.max(m.project_raw(x, &res).iter().map(|z| z * z).sum::<f64>().sqrt());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Manifold, ManifoldPoint};

    fn s2() -> Manifold {
        "sphere:2".parse().unwrap()
    }

    fn great_circle(n: usize, sub: usize, len: f64) -> DiscreteCurve {
        DiscreteCurve::sample(s2(), n, sub, |t| {
            ManifoldPoint::new(s2(), vec![(len * t).cos(), (len * t).sin(), 0.0])
        })
        .unwrap()
    }

    fn knot_values(c: &DiscreteCurve, f: impl Fn(usize) -> Vec<f64>) -> KnotValues {
        let vals = c
            .knot_indices()
            .iter()
            .enumerate()
            .map(|(i, &k)| TangentVector::new(c.points()[k].clone(), f(i)).unwrap())
            .collect();
        KnotValues::new(c, vals).unwrap()
    }

    #[test]
    fn euclidean_is_piecewise_linear() {
        let m: Manifold = "euclidean:2".parse().unwrap();
        let c = DiscreteCurve::sample(m, 2, 8, |t| ManifoldPoint::new(m, vec![t, t * t])).unwrap();
        let kv = knot_values(&c, |i| vec![i as f64, (i * i) as f64 - 1.0]);
        let w = jacobi_interpolate(&c, &kv).unwrap();
        for (k, v) in w.vectors().iter().enumerate() {
            let s = k as f64 / 8.0;
            let expect = if k <= 8 { vec![s, -1.0 + s] } else { vec![s, 0.0 + 3.0 * (s - 1.0)] };
            assert!(v.vec().iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-12), "{k}");
        }
        assert!(jacobi_residual(&c, &w).unwrap() < 1e-9);
    }

    #[test]
    fn normal_component_follows_sine_solution() {
        // unit speed great circle of length h = 1: w'' + w = 0
        let c = great_circle(1, 1000, 1.0);
        let a = 0.7;
        let kv = knot_values(&c, |i| if i == 0 { vec![0.0, 0.0, 0.0] } else { vec![0.0, 0.0, a] });
        let w = jacobi_interpolate(&c, &kv).unwrap();
        let err = w
            .vectors()
            .iter()
            .zip(c.times())
            .map(|(v, &t)| (v.vec()[2] - a * t.sin() / 1f64.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(jacobi_residual(&c, &w).unwrap() < 1e-8);
    }

    #[test]
    fn tangential_component_is_linear_on_geodesics() {
        let c = great_circle(1, 50, 1.0);
        let kv = knot_values(&c, |i| {
            let t = i as f64;
            vec![-t.sin() * (1.0 + t), t.cos() * (1.0 + t), 0.0]
        });
        let w = jacobi_interpolate(&c, &kv).unwrap();
        for (v, &t) in w.vectors().iter().zip(c.times()) {
            assert!((v.norm() - (1.0 + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_knot_values_give_zero() {
        let c = great_circle(3, 10, 1.2);
        let kv = knot_values(&c, |_| vec![0.0; 3]);
        assert_eq!(jacobi_interpolate(&c, &kv).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn knot_values_are_reproduced_exactly() {
        let c = great_circle(3, 10, 1.2);
        let kv = knot_values(&c, |i| {
            let t = 1.2 * i as f64 / 3.0;
            vec![0.3 * t.sin(), -0.3 * t.cos(), 1.0 + i as f64]
        });
        let w = jacobi_interpolate(&c, &kv).unwrap();
        for (i, &k) in c.knot_indices().iter().enumerate() {
            assert_eq!(w.vectors()[k].vec(), kv.values()[i].vec());
        }
    }

    #[test]
    fn long_intervals_are_rejected() {
        // a half great circle per knot interval: w'' + w = 0 is singular at length pi
        let c = great_circle(1, 200, 3.2);
        let kv = knot_values(&c, |_| vec![0.0, 0.0, 1.0]);
        assert!(matches!(jacobi_interpolate(&c, &kv), Err(Error::Domain(_))));
    }

    #[test]
    fn mismatched_knot_values() {
        let c = great_circle(2, 4, 1.0);
        let p = c.points()[1].clone();
        let v = TangentVector::new(p, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(KnotValues::new(&c, vec![v.clone(), v.clone(), v]), Err(Error::Contract(_))));
    }
}

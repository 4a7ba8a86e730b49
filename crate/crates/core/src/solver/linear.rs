use crate::curve::{uniform_times, DiscreteCurve};
use crate::error::Result;
use crate::manifold::ManifoldPoint;

use super::InterpolationProblem;

/// Piecewise geodesic interpolant sampled on the fine grid. Knot nodes hold
/// the knot points exactly.
pub fn linear_spline(prob: &InterpolationProblem) -> Result<DiscreteCurve> {
    let m = prob.manifold();
    let (n, sub) = (prob.intervals(), prob.fine_substeps());
    let knots = prob.knot_points();
    let mut points = Vec::with_capacity(n * sub + 1);
    for w in knots.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dir = m.log_raw(a.coords(), b.coords());
        points.push(a.clone());
        for j in 1..sub {
            let s = j as f64 / sub as f64;
            let v: Vec<f64> = dir.iter().map(|x| s * x).collect();
            points.push(ManifoldPoint::from_raw(m, m.exp_raw(a.coords(), &v)));
        }
    }
    points.push(knots[n].clone());
    let times = uniform_times(n, sub)?;
    let knot_indices = (0..=n).map(|i| i * sub).collect();
    Ok(DiscreteCurve::from_parts_unchecked(m, times, points, knot_indices))
}

//! Inequality checks evaluated on a computed interpolant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::{
    accel, covariant_second_derivative, cubic_energy, path_energy, velocity, DiscreteCurve, VectorFieldAlongCurve,
};
use crate::error::Result;
use crate::jacobi::{jacobi_interpolate, KnotValues};

use super::{Method, TestCurve};

/// Slack on the interval bound `|u| <= h^2/8 |D^2 u|` for the discrete
/// second differences.
pub const APPROXIMATION_SLACK: f64 = 1.05;
pub const VELOCITY_TOL: f64 = 1e-6;
pub const STABILITY_TOL: f64 = 1e-6;
/// Energies are measured with second-order stencils on the fine grid, so
/// the comparison allows `ENERGY_TOL + ENERGY_QUADRATURE * delta^2 * E`.
pub const ENERGY_TOL: f64 = 1e-6;
pub const ENERGY_QUADRATURE: f64 = 2.0;
/// Rounding allowance on the knot distance check.
pub const CLOSENESS_TOL: f64 = 1e-12;

/// A measured inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Check {
    fn le(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }
}

pub type Diagnostics = BTreeMap<String, Check>;

/// Names of the checks, in report order.
pub const CHECK_NAMES: [&str; 6] = [
    "a_velocity",
    "b_closeness",
    "c_energy",
    "d_second_derivative",
    "e_approximation",
    "f_stability",
];

/// Evaluates the checks for `spline`, an interpolant of `curve` with `n`
/// knot intervals. `truth` is `curve` sampled on the spline's grid.
pub fn diagnostics(curve: &TestCurve, spline: &DiscreteCurve, truth: &DiscreteCurve, method: Method) -> Result<Diagnostics> {
    let m = spline.manifold();
    let n = spline.knot_indices().len() - 1;
    let h = 1.0 / n as f64;
    let truth_acc = accel(truth)?;
    let speed: Vec<f64> = spline.times().iter().map(|&t| curve.velocity(t).norm()).collect();
    let speed_inf = speed.iter().copied().fold(0.0, f64::max);
    let speed_l2 = path_energy(truth)?.sqrt();
    let spline_vel = velocity(spline)?;
    let mut out = Diagnostics::new();

    // (a) speed bound
    let a = match method {
        Method::Cubic => Check::le(
            spline_vel.sup_norm(),
            speed[0] + 2.0 * cubic_energy(truth)?.sqrt() + VELOCITY_TOL,
        ),
        Method::Linear => Check::le(spline_vel.sup_norm(), speed_inf + VELOCITY_TOL),
    };
    out.insert(CHECK_NAMES[0].into(), a);

    // (b) distance to the knots: largest d(c_h(t), c(t_i)) minus its bound
    // over t in the two knot intervals next to t_i.
    let knots = spline.knot_indices();
    let times = spline.times();
    let mut worst = f64::NEG_INFINITY;
    for (i, &ki) in knots.iter().enumerate() {
        let lo = knots[i.saturating_sub(1)];
        let hi = knots[(i + 1).min(n)];
        let p = curve.point(times[ki]);
        for k in lo..=hi {
            let dt = (times[k] - times[ki]).abs();
            if dt == 0.0 {
                continue;
            }
            let d = m.dist_raw(spline.points()[k].coords(), p.coords());
            let bound = match method {
                Method::Cubic => dt * speed_inf,
                Method::Linear => 2.0 * dt.sqrt() * speed_l2,
            };
            worst = worst.max(d - bound);
        }
    }
    out.insert(CHECK_NAMES[1].into(), Check::le(worst, CLOSENESS_TOL));

    // (c) the interpolant does not exceed the energy of the curve it
    // interpolates
    let delta = times[1] - times[0];
    let (e_spline, e_truth) = match method {
        Method::Cubic => (cubic_energy(spline)?, cubic_energy(truth)?),
        Method::Linear => (path_energy(spline)?, path_energy(truth)?),
    };
    let c = Check::le(
        e_spline,
        e_truth * (1.0 + ENERGY_QUADRATURE * delta * delta) + ENERGY_TOL,
    );
    out.insert(CHECK_NAMES[2].into(), c);

    // (d) second derivative: excess over three times the curve's, per h^1.5
    let acc_inf = accel(spline)?.sup_norm();
    let d = match method {
        Method::Cubic => Check::le((acc_inf - 3.0 * truth_acc.sup_norm()) / h.powf(1.5), 1.0),
        Method::Linear => Check::le(acc_inf, 1e-6),
    };
    out.insert(CHECK_NAMES[3].into(), d);

    // (e) u = log_{c_h} c vanishes at the knots, so |u| <= h^2/8 |D^2 u|
    let u: Vec<Vec<f64>> = spline
        .points()
        .iter()
        .zip(truth.points())
        .map(|(p, q)| m.log_raw(p.coords(), q.coords()))
        .collect();
    let u = VectorFieldAlongCurve::from_ambient(spline, u);
    let d2u = covariant_second_derivative(spline, &u)?.sup_norm();
    let ratio = if d2u > 0.0 { u.sup_norm() / (h * h * d2u) } else { 0.0 };
    out.insert(CHECK_NAMES[4].into(), Check::le(ratio, 0.125 * APPROXIMATION_SLACK));

    // (f) the Jacobi interpolant of D^2 c at the knots stays within twice
    // its largest knot value
    let kv = KnotValues::new(
        spline,
        knots
            .iter()
            .map(|&k| {
                let v = &truth_acc.vectors()[k];
                crate::manifold::TangentVector::from_raw(spline.points()[k].clone(), v.vec().to_vec())
            })
            .collect(),
    )?;
    let lv = jacobi_interpolate(spline, &kv)?;
    out.insert(
        CHECK_NAMES[5].into(),
        Check::le(lv.sup_norm(), 2.0 * kv.sup_norm() + STABILITY_TOL),
    );
    Ok(out)
}

//! Closed-form test curves with their velocities.

use std::f64::consts::PI;
use std::fmt;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};

pub const BUILTIN_CURVES: [&str; 4] = ["sphere-wobble", "sphere-greatcircle", "hyperbolic-arc", "euclidean-sine"];

/// Arc length of the great circle test curve.
pub const GREAT_CIRCLE_LENGTH: f64 = 1.5;

#[derive(Clone, Copy)]
pub struct TestCurve {
    name: &'static str,
    manifold: Manifold,
    point: fn(f64) -> Vec<f64>,
    velocity: fn(f64) -> Vec<f64>,
}

impl fmt::Debug for TestCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestCurve")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .finish()
    }
}

impl TestCurve {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn point(&self, t: f64) -> ManifoldPoint {
        ManifoldPoint::from_raw(self.manifold, (self.point)(t))
    }

    pub fn velocity(&self, t: f64) -> TangentVector {
        let p = self.point(t);
        let v = self.manifold.project_raw(p.coords(), &(self.velocity)(t));
        TangentVector::from_raw(p, v)
    }

    /// Samples the curve on `intervals` knot intervals of `substeps` steps.
    pub fn sample(&self, intervals: usize, substeps: usize) -> Result<DiscreteCurve> {
        DiscreteCurve::sample(self.manifold, intervals, substeps, |t| Ok(self.point(t)))
    }
}

pub fn builtin_curve(name: &str) -> Result<TestCurve> {
    let (manifold, point, velocity): (Manifold, fn(f64) -> Vec<f64>, fn(f64) -> Vec<f64>) = match name {
        "sphere-wobble" => (Manifold::Sphere { dim: 2 }, wobble, wobble_velocity),
        "sphere-greatcircle" => (Manifold::Sphere { dim: 2 }, great_circle, great_circle_velocity),
        "hyperbolic-arc" => (Manifold::Hyperbolic { dim: 2 }, hyperbolic_arc, hyperbolic_arc_velocity),
        "euclidean-sine" => (Manifold::Euclidean { dim: 2 }, sine, sine_velocity),
        other => {
            return Err(Error::config(format!(
                "unknown curve '{other}' (known: {})",
                BUILTIN_CURVES.join(", ")
            )))
        }
    };
    let name = BUILTIN_CURVES.iter().find(|n| **n == name).copied().unwrap_or("");
    Ok(TestCurve {
        name,
        manifold,
        point,
        velocity,
    })
}

// Polar angle a(t) and azimuth b(t) of the wobble.
fn wobble_angles(t: f64) -> (f64, f64, f64, f64) {
    let a = 1.2 + 0.25 * (PI * t).sin();
    let da = 0.25 * PI * (PI * t).cos();
    let b = 1.3 * t + 0.3 * t * t;
    let db = 1.3 + 0.6 * t;
    (a, da, b, db)
}

fn wobble(t: f64) -> Vec<f64> {
    let (a, _, b, _) = wobble_angles(t);
    vec![a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]
}

fn wobble_velocity(t: f64) -> Vec<f64> {
    let (a, da, b, db) = wobble_angles(t);
    vec![
        da * a.cos() * b.cos() - db * a.sin() * b.sin(),
        da * a.cos() * b.sin() + db * a.sin() * b.cos(),
        -da * a.sin(),
    ]
}

fn great_circle(t: f64) -> Vec<f64> {
    let s = GREAT_CIRCLE_LENGTH * t;
    vec![s.cos(), s.sin(), 0.0]
}

fn great_circle_velocity(t: f64) -> Vec<f64> {
    let s = GREAT_CIRCLE_LENGTH * t;
    vec![-GREAT_CIRCLE_LENGTH * s.sin(), GREAT_CIRCLE_LENGTH * s.cos(), 0.0]
}

fn hyperbolic_arc(t: f64) -> Vec<f64> {
    let (r, p) = (0.6 + 0.3 * t, 1.2 * t);
    vec![r.cosh(), r.sinh() * p.cos(), r.sinh() * p.sin()]
}

fn hyperbolic_arc_velocity(t: f64) -> Vec<f64> {
    let (r, p) = (0.6 + 0.3 * t, 1.2 * t);
    let (dr, dp) = (0.3, 1.2);
    vec![
        dr * r.sinh(),
        dr * r.cosh() * p.cos() - dp * r.sinh() * p.sin(),
        dr * r.cosh() * p.sin() + dp * r.sinh() * p.cos(),
    ]
}

fn sine(t: f64) -> Vec<f64> {
    vec![t, (2.0 * PI * t).sin()]
}

fn sine_velocity(t: f64) -> Vec<f64> {
    vec![1.0, 2.0 * PI * (2.0 * PI * t).cos()]
}

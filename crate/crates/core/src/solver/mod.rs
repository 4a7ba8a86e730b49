//! Linear and cubic spline interpolation on a fine grid.

pub mod banded;
mod cubic;
mod linear;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldPoint, TangentVector};
use crate::Manifold;

pub use cubic::{cubic_spline, initial_guess, minimize_energy, Constraints, HermiteCurve, HermiteEnergy};
pub use linear::linear_spline;

/// Outcome of an energy minimization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub final_energy: f64,
    /// Sup norm of the discrete Euler-Lagrange residual; NaN when the grid is
    /// too coarse to evaluate it.
    pub el_residual_inf: f64,
    pub converged: bool,
    /// Absolute gradient threshold the run was held to.
    pub gradient_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative stopping tolerance: stop once the gradient sup norm is at
    /// most `grad_tol * (1 + |g_0|)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Fine steps per knot interval; `None` picks `max(64, ceil(4/h))`.
    pub substeps: Option<usize>,
    /// Relative gradient level below which gradient descent hands over to
    /// Gauss-Newton. `None` runs Gauss-Newton from the first iteration.
    pub newton_switch: Option<f64>,
    pub armijo_factor: f64,
    pub sufficient_decrease: f64,
    /// Write `iteration,energy,gradient_norm` rows here when set.
    pub log_path: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iters: 10_000,
            substeps: None,
            newton_switch: None,
            armijo_factor: 0.5,
            sufficient_decrease: 1e-4,
            log_path: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::config("grad_tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if !(self.armijo_factor > 0.0 && self.armijo_factor < 1.0) {
            return Err(Error::config("armijo_factor must lie in (0, 1)"));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 0.5) {
            return Err(Error::config("sufficient_decrease must lie in (0, 0.5)"));
        }
        if self.substeps == Some(0) {
            return Err(Error::config("substeps must be at least 1"));
        }
        Ok(())
    }

    /// Fine steps per knot interval for `n` knot intervals.
    pub fn substeps_for(&self, n: usize) -> usize {
        self.substeps.unwrap_or_else(|| default_substeps(n))
    }
}

/// `max(64, ceil(4/h))` with `h = 1/n`.
pub fn default_substeps(n: usize) -> usize {
    (4 * n).max(64)
}

/// Interpolation data: knot points at `t_i = i/N` plus, for cubic splines,
/// Hermite velocities at both ends.
#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    manifold: Manifold,
    knot_points: Vec<ManifoldPoint>,
    boundary: Option<(TangentVector, TangentVector)>,
    fine_substeps: usize,
}

impl InterpolationProblem {
    pub fn linear(knot_points: Vec<ManifoldPoint>, fine_substeps: usize) -> Result<Self> {
        Self::build(knot_points, None, fine_substeps)
    }

    pub fn cubic(
        knot_points: Vec<ManifoldPoint>,
        v_start: TangentVector,
        v_end: TangentVector,
        fine_substeps: usize,
    ) -> Result<Self> {
        Self::build(knot_points, Some((v_start, v_end)), fine_substeps)
    }

    fn build(
        knot_points: Vec<ManifoldPoint>,
        boundary: Option<(TangentVector, TangentVector)>,
        fine_substeps: usize,
    ) -> Result<Self> {
        if knot_points.len() < 2 {
            return Err(Error::config("need at least two knot points"));
        }
        if fine_substeps == 0 {
            return Err(Error::config("fine_substeps must be at least 1"));
        }
        let manifold = knot_points[0].manifold();
        if knot_points.iter().any(|p| p.manifold() != manifold) {
            return Err(Error::contract("knot points lie on different manifolds"));
        }
        let reach = 0.9 * manifold.injectivity_radius();
        for (i, w) in knot_points.windows(2).enumerate() {
            let d = w[0].dist(&w[1])?;
            if d >= reach {
                return Err(Error::domain(format!(
                    "knots {i} and {} are {d:.6} apart, beyond the injectivity reach {reach:.6}",
                    i + 1
                )));
            }
        }
        if let Some((a, b)) = &boundary {
            if !a.base().same_as(&knot_points[0]) || !b.base().same_as(knot_points.last().unwrap()) {
                return Err(Error::contract("boundary velocities must be based at the end knots"));
            }
        }
        Ok(Self {
            manifold,
            knot_points,
            boundary,
            fine_substeps,
        })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    /// Number of knot intervals `N`.
    pub fn intervals(&self) -> usize {
        self.knot_points.len() - 1
    }

    pub fn knot_points(&self) -> &[ManifoldPoint] {
        &self.knot_points
    }

    pub fn v_start(&self) -> Option<&TangentVector> {
        self.boundary.as_ref().map(|b| &b.0)
    }

    pub fn v_end(&self) -> Option<&TangentVector> {
        self.boundary.as_ref().map(|b| &b.1)
    }

    pub fn fine_substeps(&self) -> usize {
        self.fine_substeps
    }

    pub fn h(&self) -> f64 {
        1.0 / self.intervals() as f64
    }
}

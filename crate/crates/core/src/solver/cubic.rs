//! Cubic spline interpolation by direct minimization of a discrete energy.
//!
//! Every fine-grid node carries a point `x_k` and a velocity `v_k`. On the
//! fine interval `[t_k, t_{k+1}]` the curve is modelled, in `T_{x_k}`, by the
//! cubic Hermite polynomial with end offsets `0` and `L = log_{x_k} x_{k+1}`
//! and end slopes `v_k` and the transported `w = P v_{k+1}`. Its second
//! derivative is linear, going from `a` to `b`, and the energy of the interval
//! is the exact integral `delta/3 (|a|^2 + <a,b> + |b|^2)`. In flat space the
//! total is exactly the `int |y''|^2` of a C^1 piecewise cubic, so the
//! minimizer is the classical spline.
//!
//! The energy is a sum of squares of per-interval residuals, which makes a
//! Gauss-Newton step a banded linear solve. Jacobians come from forward-mode
//! dual numbers pushed through the closed-form `log` and transport kernels.

use std::io::Write;

use num_dual::Dual64;
use rayon::prelude::*;

use crate::curve::{el_residual_norm, DiscreteCurve, VectorFieldAlongCurve};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, Scalar};

use super::banded::BandedSpd;
use super::{linear_spline, InterpolationProblem, SolveStats, SolverOptions};

/// A discrete curve together with a velocity at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteCurve {
    curve: DiscreteCurve,
    velocities: Vec<Vec<f64>>,
}

impl HermiteCurve {
    pub fn new(curve: DiscreteCurve, velocities: &VectorFieldAlongCurve) -> Result<Self> {
        // Re-validate that the field sits on this curve.
        let velocities = VectorFieldAlongCurve::new(&curve, velocities.vectors().to_vec())?.raw();
        Ok(Self { curve, velocities })
    }

    pub fn curve(&self) -> &DiscreteCurve {
        &self.curve
    }

    pub fn into_curve(self) -> DiscreteCurve {
        self.curve
    }

    pub fn velocities(&self) -> VectorFieldAlongCurve {
        VectorFieldAlongCurve::from_ambient(&self.curve, self.velocities.clone())
    }
}

/// Which node values an optimizer must leave untouched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraints {
    pub fixed_positions: Vec<usize>,
    pub fixed_velocities: Vec<usize>,
}

impl Constraints {
    /// Knot nodes are pinned, and so are the velocities at both ends.
    pub fn hermite(curve: &DiscreteCurve) -> Self {
        Self {
            fixed_positions: curve.knot_indices().to_vec(),
            fixed_velocities: vec![0, curve.len() - 1],
        }
    }
}

/// Second-derivative end values `(a, b)` of the Hermite cubic on one fine
/// interval, both in `T_{x0}`.
fn hermite_ends<T: Scalar>(m: Manifold, delta: f64, x0: &[T], v0: &[T], x1: &[T], v1: &[T]) -> (Vec<T>, Vec<T>) {
    let l = m.log_raw(x0, x1);
    let w = m.transport_raw(x1, x0, v1);
    let inv = 1.0 / (delta * delta);
    let a = (0..l.len())
        .map(|i| (l[i] * 6.0 - (v0[i] * 4.0 + w[i] * 2.0) * delta) * inv)
        .collect();
    let b = (0..l.len())
        .map(|i| (l[i] * (-6.0) + (v0[i] * 2.0 + w[i] * 4.0) * delta) * inv)
        .collect();
    (a, b)
}

/// Residual `r` with `|r|^2` equal to the interval energy, in the
/// orthonormal frame `basis` of `T_{x0}`.
fn residual_in_frame(m: Manifold, delta: f64, basis: &[Vec<f64>], a: &[f64], b: &[f64]) -> Vec<f64> {
    let s = (delta / 3.0).sqrt();
    let half_root3 = 0.75f64.sqrt();
    let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + 0.5 * y).collect();
    let mut r: Vec<f64> = basis.iter().map(|e| s * m.dot(e, &mid)).collect();
    r.extend(basis.iter().map(|e| s * half_root3 * m.dot(e, b)));
    r
}

fn interval_energy(m: Manifold, delta: f64, a: &[f64], b: &[f64]) -> f64 {
    delta / 3.0 * (m.dot(a, a) + m.dot(a, b) + m.dot(b, b))
}

/// One fine interval's contribution at the current iterate.
struct Block {
    energy: f64,
    rho: Vec<f64>,
    /// Rounding level of each residual entry.
    rho_noise: f64,
    /// Jacobian columns for the free local variables, by global index.
    cols: Vec<(usize, Vec<f64>)>,
}

struct Linearization {
    energy: f64,
    gradient: Vec<f64>,
    hessian: BandedSpd,
    /// Rough size of the rounding error in `energy`.
    energy_noise: f64,
    /// Rough size of the rounding error in each gradient entry.
    gradient_noise: f64,
}

/// The discrete Hermite energy with its free-variable layout.
///
/// Free variables live in local coordinates: a position update `xi` moves
/// `x_k` to `exp_{x_k}(E xi)`, a velocity update `eta` replaces `v_k` by the
/// transport of `v_k + E eta` to the new point, where `E` is the orthonormal
/// tangent frame of [`Manifold::tangent_basis`].
#[derive(Clone, Debug)]
pub struct HermiteEnergy {
    manifold: Manifold,
    deltas: Vec<f64>,
    pos_var: Vec<Option<usize>>,
    vel_var: Vec<Option<usize>>,
    num_vars: usize,
}

impl HermiteEnergy {
    pub fn new(state: &HermiteCurve, constraints: &Constraints) -> Result<Self> {
        let curve = &state.curve;
        let n = curve.len();
        if constraints.fixed_positions.iter().chain(&constraints.fixed_velocities).any(|&k| k >= n) {
            return Err(Error::contract("constraint index beyond the curve"));
        }
        let manifold = curve.manifold();
        let d = manifold.dim();
        let mut deltas = vec![0.0; n - 1];
        for (s, e) in curve.segments() {
            let step = curve.spacing(s, e);
            deltas[s..e].iter_mut().for_each(|x| *x = step);
        }
        let mut pos_fixed = vec![false; n];
        let mut vel_fixed = vec![false; n];
        constraints.fixed_positions.iter().for_each(|&k| pos_fixed[k] = true);
        constraints.fixed_velocities.iter().for_each(|&k| vel_fixed[k] = true);
        let mut next = 0;
        let mut take = |fixed: bool| {
            (!fixed).then(|| {
                next += d;
                next - d
            })
        };
        let mut pos_var = Vec::with_capacity(n);
        let mut vel_var = Vec::with_capacity(n);
        for k in 0..n {
            pos_var.push(take(pos_fixed[k]));
            vel_var.push(take(vel_fixed[k]));
        }
        Ok(Self {
            manifold,
            deltas,
            pos_var,
            vel_var,
            num_vars: next,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn energy(&self, state: &HermiteCurve) -> f64 {
        let m = self.manifold;
        let x = state.curve.points();
        let v = &state.velocities;
        (0..self.deltas.len())
            .map(|k| {
                let (a, b) = hermite_ends(m, self.deltas[k], x[k].coords(), &v[k], x[k + 1].coords(), &v[k + 1]);
                interval_energy(m, self.deltas[k], &a, &b)
            })
            .sum()
    }

    /// Gradient in local coordinates.
    pub fn gradient(&self, state: &HermiteCurve) -> Vec<f64> {
        self.linearize(state).gradient
    }

    fn block(&self, state: &HermiteCurve, bases: &[Vec<Vec<f64>>], k: usize) -> Block {
        let m = self.manifold;
        let (d, kappa, delta) = (m.dim(), m.curvature_sign(), self.deltas[k]);
        let x0 = state.curve.points()[k].coords();
        let x1 = state.curve.points()[k + 1].coords();
        let (v0, v1) = (&state.velocities[k], &state.velocities[k + 1]);
        let (a, b) = hermite_ends(m, delta, x0, v0, x1, v1);
        let energy = interval_energy(m, delta, &a, &b);
        let rho = residual_in_frame(m, delta, &bases[k], &a, &b);
        let scale = sup(x0).max(sup(x1)) + delta * sup(v0).max(sup(v1));
        let rho_noise = (delta / 3.0).sqrt() * 6.0 * f64::EPSILON * scale / (delta * delta);

        let lift = |p: &[f64]| p.iter().map(|&c| Dual64::from(c)).collect::<Vec<_>>();
        let mut cols = Vec::new();
        for (side, node, x, v) in [(0, k, x0, v0), (1, k + 1, x1, v1)] {
            for (is_pos, var) in [(true, self.pos_var[node]), (false, self.vel_var[node])] {
                let Some(start) = var else { continue };
                for (i, e) in bases[node].iter().enumerate() {
                    let mut xd = lift(x);
                    let mut vd = lift(v);
                    if is_pos {
                        let tilt = -kappa * m.dot(e, v);
                        for j in 0..x.len() {
                            xd[j].eps = e[j];
                            vd[j].eps = tilt * x[j];
                        }
                    } else {
                        for j in 0..x.len() {
                            vd[j].eps = e[j];
                        }
                    }
                    let (ad, bd) = if side == 0 {
                        hermite_ends(m, delta, &xd, &vd, &lift(x1), &lift(v1))
                    } else {
                        hermite_ends(m, delta, &lift(x0), &lift(v0), &xd, &vd)
                    };
                    let da: Vec<f64> = ad.iter().map(|z| z.eps).collect();
                    let db: Vec<f64> = bd.iter().map(|z| z.eps).collect();
                    // Normal parts of da, db drop out: a and b are tangent,
                    // so only tangential changes move |a|^2 to first order.
                    cols.push((start + i, residual_in_frame(m, delta, &bases[k], &da, &db)));
                }
            }
        }
        debug_assert!(cols.iter().all(|(_, c)| c.len() == 2 * d));
        Block {
            energy,
            rho,
            rho_noise,
            cols,
        }
    }

    fn linearize(&self, state: &HermiteCurve) -> Linearization {
        let m = self.manifold;
        let d = m.dim();
        let bases: Vec<Vec<Vec<f64>>> = state
            .curve
            .points()
            .par_iter()
            .map(|p| m.tangent_basis(p.coords()))
            .collect();
        let blocks: Vec<Block> = (0..self.deltas.len())
            .into_par_iter()
            .map(|k| self.block(state, &bases, k))
            .collect();
        let bw = (4 * d).saturating_sub(1);
        let mut hessian = BandedSpd::zeros(self.num_vars, bw);
        let mut gradient = vec![0.0; self.num_vars];
        let mut energy = 0.0;
        let mut noise = 0.0;
        let mut gnoise = vec![0.0; self.num_vars];
        for blk in &blocks {
            energy += blk.energy;
            for (ia, ca) in &blk.cols {
                let g: f64 = 2.0 * ca.iter().zip(&blk.rho).map(|(x, y)| x * y).sum::<f64>();
                gradient[*ia] += g;
                noise += g.abs();
                gnoise[*ia] += 2.0 * blk.rho_noise * ca.iter().map(|x| x.abs()).sum::<f64>();
                for (ib, cb) in &blk.cols {
                    if ib <= ia {
                        hessian.add(*ia, *ib, 2.0 * ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>());
                    }
                }
            }
        }
        Linearization {
            energy,
            gradient,
            hessian,
            energy_noise: 16.0 * f64::EPSILON * (noise + energy),
            gradient_noise: sup(&gnoise),
        }
    }

    /// Moves `state` by `step` (local coordinates, scaled by `t`).
    pub fn retract(&self, state: &HermiteCurve, step: &[f64], t: f64) -> HermiteCurve {
        let m = self.manifold;
        let d = m.dim();
        let pts = state.curve.points();
        let comb = |basis: &[Vec<f64>], coeffs: &[f64]| {
            let mut out = vec![0.0; m.ambient_dim()];
            for (e, c) in basis.iter().zip(coeffs) {
                out.iter_mut().zip(e).for_each(|(o, x)| *o += t * c * x);
            }
            out
        };
        let moved: Vec<(ManifoldPoint, Vec<f64>)> = (0..pts.len())
            .into_par_iter()
            .map(|k| {
                let x = pts[k].coords();
                let v = &state.velocities[k];
                if self.pos_var[k].is_none() && self.vel_var[k].is_none() {
                    return (pts[k].clone(), v.clone());
                }
                let basis = m.tangent_basis(x);
                let mut vnew = v.clone();
                if let Some(s) = self.vel_var[k] {
                    let dv = comb(&basis, &step[s..s + d]);
                    vnew.iter_mut().zip(&dv).for_each(|(a, b)| *a += b);
                }
                let p = match self.pos_var[k] {
                    Some(s) => {
                        let dx = comb(&basis, &step[s..s + d]);
                        let p = ManifoldPoint::from_raw(m, m.exp_raw(x, &dx));
                        vnew = m.transport_raw(x, p.coords(), &vnew);
                        p
                    }
                    None => pts[k].clone(),
                };
                let vnew = m.project_raw(p.coords(), &vnew);
                (p, vnew)
            })
            .collect();
        let (points, velocities): (Vec<_>, Vec<_>) = moved.into_iter().unzip();
        let c = &state.curve;
        HermiteCurve {
            curve: DiscreteCurve::from_parts_unchecked(m, c.times().to_vec(), points, c.knot_indices().to_vec()),
            velocities,
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gauss-Newton direction `-H^{-1} g`, adding a small diagonal shift when
/// `H` is not numerically positive definite.
fn newton_direction(h: &BandedSpd, g: &[f64]) -> Option<Vec<f64>> {
    let scale = h.max_diag().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut hs = h.clone();
        hs.add_diag(shift);
        if let Ok(chol) = hs.cholesky() {
            return Some(chol.solve(g).into_iter().map(|x| -x).collect());
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 100.0 };
    }
    None
}

/// Minimizes the Hermite energy from `c0`, keeping the constrained node
/// values fixed. Armijo backtracking keeps the energy non-increasing.
pub fn minimize_energy(
    c0: HermiteCurve,
    constraints: &Constraints,
    opts: &SolverOptions,
) -> Result<(HermiteCurve, SolveStats)> {
    opts.validate()?;
    let objective = HermiteEnergy::new(&c0, constraints)?;
    let mut log = match &opts.log_path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            writeln!(f, "iteration,energy,gradient_norm")?;
            Some(f)
        }
        None => None,
    };

    let mut state = c0;
    let mut lin = objective.linearize(&state);
    let g0 = sup(&lin.gradient);
    // The gradient cannot be resolved below its rounding level, which grows
    // like delta^-3; the requested tolerance is raised to that floor.
    let threshold = (opts.grad_tol * (1.0 + g0)).max(lin.gradient_noise);
    let mut stats = SolveStats {
        gradient_threshold: threshold,
        ..Default::default()
    };
    let mut gd_step = 1.0 / (1.0 + g0);

    loop {
        let gnorm = sup(&lin.gradient);
        stats.final_gradient_norm = gnorm;
        stats.final_energy = lin.energy;
        if let Some(f) = log.as_mut() {
            writeln!(f, "{},{:.17e},{:.17e}", stats.iterations, lin.energy, gnorm)?;
        }
        if gnorm <= threshold {
            stats.converged = true;
            break;
        }
        if stats.iterations >= opts.max_iters {
            return Err(solver_error("no convergence within max_iters", &state, stats));
        }

        let newton = match opts.newton_switch {
            None => true,
            Some(level) => gnorm <= level * (1.0 + g0),
        };
        let (dir, mut t) = if newton {
            match newton_direction(&lin.hessian, &lin.gradient) {
                Some(dir) => (dir, 1.0),
                None => return Err(solver_error("Gauss-Newton system is singular", &state, stats)),
            }
        } else {
            (lin.gradient.iter().map(|g| -g).collect(), gd_step)
        };
        let slope = dot(&lin.gradient, &dir);
        if !(slope < 0.0) {
            return Err(solver_error("search direction is not a descent direction", &state, stats));
        }

        let mut accepted = None;
        while t > 1e-14 {
            let trial = objective.retract(&state, &dir, t);
            let e = objective.energy(&trial);
            let armijo = e <= lin.energy + opts.sufficient_decrease * t * slope;
            // A full Gauss-Newton step whose predicted gain is below the
            // rounding level of the energy cannot be judged by Armijo.
            let at_noise = newton && t == 1.0 && -slope <= lin.energy_noise && e <= lin.energy + lin.energy_noise;
            if armijo || at_noise {
                accepted = Some(trial);
                break;
            }
            t *= opts.armijo_factor;
        }
        let Some(next) = accepted else {
            return Err(solver_error("line search failed", &state, stats));
        };
        if !newton {
            gd_step = (t / opts.armijo_factor).min(1e6);
        }
        state = next;
        lin = objective.linearize(&state);
        stats.iterations += 1;
    }
    if let Some(mut f) = log {
        f.flush()?;
    }
    stats.el_residual_inf = el_residual_norm(&state.curve).unwrap_or(f64::NAN);
    Ok((state, stats))
}

fn solver_error(reason: &str, state: &HermiteCurve, mut stats: SolveStats) -> Error {
    stats.el_residual_inf = el_residual_norm(&state.curve).unwrap_or(f64::NAN);
    Error::Solver {
        reason: reason.to_string(),
        stats: Box::new(stats),
    }
}

/// The linear spline with geodesic velocities (averaged at interior knots)
/// and the Hermite data at both ends.
pub fn initial_guess(prob: &InterpolationProblem) -> Result<HermiteCurve> {
    let (Some(v_start), Some(v_end)) = (prob.v_start(), prob.v_end()) else {
        return Err(Error::config("cubic interpolation needs boundary velocities"));
    };
    let m = prob.manifold();
    let curve = linear_spline(prob)?;
    let (n, sub, h) = (prob.intervals(), prob.fine_substeps(), prob.h());
    let knots = prob.knot_points();
    let pts = curve.points();
    let mut vel = vec![vec![0.0; m.ambient_dim()]; curve.len()];
    for i in 0..n {
        let (a, b) = (knots[i].coords(), knots[i + 1].coords());
        let dir: Vec<f64> = m.log_raw(a, b).into_iter().map(|x| x / h).collect();
        for j in 0..=sub {
            let k = i * sub + j;
            let v = m.transport_raw(a, pts[k].coords(), &dir);
            let w = if j == 0 || j == sub { 0.5 } else { 1.0 };
            vel[k].iter_mut().zip(&v).for_each(|(o, x)| *o += w * x);
        }
    }
    vel[0] = v_start.vec().to_vec();
    vel[n * sub] = v_end.vec().to_vec();
    let velocities = vel
        .into_iter()
        .zip(pts)
        .map(|(v, p)| m.project_raw(p.coords(), &v))
        .collect();
    Ok(HermiteCurve { curve, velocities })
}

/// Cubic spline interpolant on the problem's fine grid.
pub fn cubic_spline(prob: &InterpolationProblem, opts: &SolverOptions) -> Result<(DiscreteCurve, SolveStats)> {
    let c0 = initial_guess(prob)?;
    let constraints = Constraints::hermite(&c0.curve);
    let (sol, stats) = minimize_energy(c0, &constraints, opts)?;
    Ok((sol.curve, stats))
}

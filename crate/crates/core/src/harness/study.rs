//! Interpolation errors and fitted orders across a ladder of knot spacings.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{lp_error, LpNorm};
use crate::error::{Error, Result};
use crate::solver::{cubic_spline, linear_spline, InterpolationProblem, SolveStats, SolverOptions};

use super::diagnostics::{diagnostics, Diagnostics, CHECK_NAMES};
use super::{fit_order, TestCurve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Cubic,
}

impl Method {
    /// Convergence order the method should show.
    pub fn expected_order(&self) -> f64 {
        match self {
            Method::Linear => 2.0,
            Method::Cubic => 4.0,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Linear => "linear",
            Method::Cubic => "cubic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Method::Linear),
            "cubic" => Ok(Method::Cubic),
            other => Err(Error::config(format!("unknown method '{other}' (known: linear, cubic)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub substeps: usize,
    /// One entry per tested norm; NaN when the solve failed.
    pub errors: Vec<f64>,
    pub stats: Option<SolveStats>,
    pub failure: Option<String>,
    pub diagnostics: Diagnostics,
}

impl StudyRow {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub manifold: String,
    pub curve: String,
    pub p_values: Vec<LpNorm>,
    /// Sorted by decreasing `h`.
    pub rows: Vec<StudyRow>,
    /// Least-squares order per norm, `None` with fewer than three usable rows.
    pub fitted_order: Vec<Option<f64>>,
    pub step_orders: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    /// Every check on every successful row passed.
    pub fn diagnostics_pass(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.ok())
            .all(|r| !r.diagnostics.is_empty() && r.diagnostics.values().all(|c| c.pass))
    }

    /// Writes one line per `(h, p)` pair, with an optional header.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> Result<()> {
        if header {
            write!(w, "method,manifold,curve,h,p,error,fitted_order")?;
            for name in CHECK_NAMES {
                write!(w, ",diag_{name}_lhs,diag_{name}_rhs,diag_{name}_pass")?;
            }
            writeln!(w)?;
        }
        for row in &self.rows {
            for (j, p) in self.p_values.iter().enumerate() {
                let order = self.fitted_order[j].unwrap_or(f64::NAN);
                write!(
                    w,
                    "{},{},{},{:.17e},{},{:.17e},{:.17e}",
                    self.method,
                    self.manifold,
                    self.curve,
                    row.h,
                    p.label(),
                    row.errors[j],
                    order
                )?;
                for name in CHECK_NAMES {
                    match row.diagnostics.get(name) {
                        Some(c) => write!(w, ",{:.17e},{:.17e},{}", c.lhs, c.rhs, if c.pass { "pass" } else { "fail" })?,
                        None => write!(w, ",,,")?,
                    }
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

fn knot_problem(curve: &TestCurve, method: Method, n: usize, substeps: usize) -> Result<InterpolationProblem> {
    let knots = (0..=n).map(|i| curve.point(i as f64 / n as f64)).collect();
    match method {
        Method::Linear => InterpolationProblem::linear(knots, substeps),
        Method::Cubic => InterpolationProblem::cubic(knots, curve.velocity(0.0), curve.velocity(1.0), substeps),
    }
}

/// `dir/log.csv` becomes `dir/log-cubic-n16.csv`.
fn row_log_path(base: &Path, method: Method, n: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("iterations");
    let name = match base.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-{method}-n{n}.{ext}"),
        None => format!("{stem}-{method}-n{n}"),
    };
    base.with_file_name(name)
}

fn study_row(curve: &TestCurve, method: Method, n: usize, p_list: &[LpNorm], opts: &SolverOptions) -> Result<StudyRow> {
    let substeps = opts.substeps_for(n);
    let prob = knot_problem(curve, method, n, substeps)?;
    // rows run concurrently, so each gets its own iteration log
    let mut opts = opts.clone();
    opts.log_path = opts.log_path.map(|p| row_log_path(&p, method, n));
    let solved = match method {
        Method::Linear => linear_spline(&prob).map(|c| (c, None)),
        Method::Cubic => cubic_spline(&prob, &opts).map(|(c, s)| (c, Some(s))),
    };
    let h = 1.0 / n as f64;
    let (spline, stats) = match solved {
        Ok(v) => v,
        Err(Error::Solver { reason, stats }) => {
            return Ok(StudyRow {
                h,
                substeps,
                errors: vec![f64::NAN; p_list.len()],
                stats: Some(*stats),
                failure: Some(reason),
                diagnostics: Diagnostics::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let truth = curve.sample(n, substeps)?;
    let errors = p_list
        .iter()
        .map(|&p| lp_error(&spline, &truth, p))
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = diagnostics(curve, &spline, &truth, method)?;
    Ok(StudyRow {
        h,
        substeps,
        errors,
        stats,
        failure: None,
        diagnostics,
    })
}

/// Interpolates `curve` with `N` knot intervals for each `N` in
/// `intervals` (ascending), measuring errors in each norm of `p_list`.
pub fn run_study(
    curve: &TestCurve,
    method: Method,
    intervals: &[usize],
    p_list: &[LpNorm],
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    if intervals.is_empty() || intervals.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("the h ladder must be nonempty and strictly decreasing"));
    }
    if p_list.is_empty() {
        return Err(Error::config("at least one norm is required"));
    }
    opts.validate()?;
    let rows = intervals
        .par_iter()
        .map(|&n| study_row(curve, method, n, p_list, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut fitted_order = Vec::with_capacity(p_list.len());
    let mut step_orders = Vec::with_capacity(p_list.len());
    for j in 0..p_list.len() {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.ok()).map(|r| (r.h, r.errors[j])).collect();
        match fit_order(&pts) {
            Ok(fit) => {
                fitted_order.push(Some(fit.order));
                step_orders.push(fit.step_orders);
            }
            Err(_) => {
                fitted_order.push(None);
                step_orders.push(Vec::new());
            }
        }
    }
    Ok(ConvergenceReport {
        method,
        manifold: curve.manifold().to_string(),
        curve: curve.name().to_string(),
        p_values: p_list.to_vec(),
        rows,
        fitted_order,
        step_orders,
    })
}

//! Config-driven convergence experiments: parse, run every configured study,
//! and write `report.csv` and `summary.json`.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::LpNorm;
use crate::error::{Error, Result};
use crate::harness::{builtin_curve, run_study, ConvergenceReport, Method};
use crate::solver::SolverOptions;

/// Half width of the accepted window around the expected order.
pub const ORDER_WINDOW: f64 = 0.4;
/// Errors at or below this level count as exact reproduction, where no
/// order can be fitted (geodesic data).
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must name the curve's manifold when given, e.g. `"sphere:2"`.
    pub manifold: Option<String>,
    pub curve: String,
    pub methods: Vec<Method>,
    /// Knot spacings `1/N`, strictly decreasing.
    pub h_ladder: Vec<f64>,
    #[serde(with = "norm_list")]
    pub p: Vec<LpNorm>,
    pub solver: SolverOptions,
    pub output_dir: PathBuf,
    /// Recorded in the summary; the studies themselves are deterministic.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifold: None,
            curve: "sphere-wobble".into(),
            methods: vec![Method::Cubic, Method::Linear],
            h_ladder: vec![0.25, 0.125, 0.0625, 0.03125],
            p: vec![LpNorm::Finite(2.0), LpNorm::Infinity],
            solver: SolverOptions::default(),
            output_dir: PathBuf::from("geospline-out"),
            seed: 0,
        }
    }
}

mod norm_list {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::curve::LpNorm;

    pub fn serialize<S: Serializer>(v: &[LpNorm], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&p| serde_json::Value::from(p)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<LpNorm>, D::Error> {
        Vec::<serde_json::Value>::deserialize(d)?
            .into_iter()
            .map(|v| LpNorm::try_from(v).map_err(D::Error::custom))
            .collect()
    }
}

impl ExperimentConfig {
    /// Parses a JSON config. Blank input gives the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let curve = builtin_curve(&self.curve)?;
        if let Some(m) = &self.manifold {
            let want = curve.manifold().to_string();
            if *m != want {
                return Err(Error::config(format!(
                    "curve '{}' lives on {want}, not {m}",
                    self.curve
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        if self.methods.iter().enumerate().any(|(i, m)| self.methods[..i].contains(m)) {
            return Err(Error::config("methods must not repeat"));
        }
        if self.p.is_empty() {
            return Err(Error::config("at least one norm is required"));
        }
        self.intervals()?;
        self.solver.validate()
    }

    /// Knot interval counts `N = 1/h`, ascending.
    pub fn intervals(&self) -> Result<Vec<usize>> {
        if self.h_ladder.len() < 3 {
            return Err(Error::config("the h ladder needs at least three entries to fit an order"));
        }
        if self.h_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config("the h ladder must be strictly decreasing"));
        }
        self.h_ladder
            .iter()
            .map(|&h| {
                let n = (1.0 / h).round();
                if !(h > 0.0 && h <= 1.0) || ((1.0 / h) - n).abs() > 1e-9 * n {
                    Err(Error::config(format!("h = {h} is not 1/N for a positive integer N")))
                } else {
                    Ok(n as usize)
                }
            })
            .collect()
    }
}

/// One pass/fail line of the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

impl AcceptanceCheck {
    fn new(name: String, pass: bool, detail: String) -> Self {
        let status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name, status, detail }
    }

    pub fn pass(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub reports: Vec<ConvergenceReport>,
    pub checks: Vec<AcceptanceCheck>,
}

impl ExperimentOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(AcceptanceCheck::pass)
    }

    /// Some solve stopped without converging.
    pub fn solver_failed(&self) -> bool {
        self.reports.iter().any(|r| r.failed_rows() > 0)
    }

    /// Writes `report.csv` and `summary.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut csv = BufWriter::new(fs::File::create(dir.join("report.csv"))?);
        for (i, r) in self.reports.iter().enumerate() {
            r.write_csv(&mut csv, i == 0)?;
        }
        std::io::Write::flush(&mut csv)?;

        let summary = Summary {
            version: env!("CARGO_PKG_VERSION"),
            pass: self.pass(),
            checks: &self.checks,
            config: &self.config,
            studies: self.reports.iter().map(StudySummary::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::config(e.to_string()))?;
        text.push('\n');
        fs::write(dir.join("summary.json"), text)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'a str,
    pass: bool,
    checks: &'a [AcceptanceCheck],
    config: &'a ExperimentConfig,
    studies: Vec<StudySummary>,
}

#[derive(Serialize)]
struct StudySummary {
    method: Method,
    curve: String,
    p: Vec<serde_json::Value>,
    fitted_order: Vec<Option<f64>>,
    step_orders: Vec<Vec<f64>>,
    rows: Vec<RowSummary>,
}

#[derive(Serialize)]
struct RowSummary {
    h: f64,
    substeps: usize,
    errors: Vec<Option<f64>>,
    iterations: Option<usize>,
    converged: bool,
    failure: Option<String>,
}

impl From<&ConvergenceReport> for StudySummary {
    fn from(r: &ConvergenceReport) -> Self {
        Self {
            method: r.method,
            curve: r.curve.clone(),
            p: r.p_values.iter().map(|&p| p.into()).collect(),
            fitted_order: r.fitted_order.clone(),
            step_orders: r.step_orders.clone(),
            rows: r
                .rows
                .iter()
                .map(|row| RowSummary {
                    h: row.h,
                    substeps: row.substeps,
                    // JSON has no NaN
                    errors: row.errors.iter().map(|e| e.is_finite().then_some(*e)).collect(),
                    iterations: row.stats.as_ref().map(|s| s.iterations),
                    converged: row.ok() && row.stats.as_ref().is_none_or(|s| s.converged),
                    failure: row.failure.clone(),
                })
                .collect(),
        }
    }
}

fn order_checks(r: &ConvergenceReport) -> Vec<AcceptanceCheck> {
    let want = r.method.expected_order();
    r.p_values
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let name = format!("{}_order_p{}", r.method, p.label());
            let worst = r.rows.iter().map(|row| row.errors[j]).fold(0.0, f64::max);
            if r.rows.iter().all(|row| row.ok()) && worst <= EXACT_TOL {
                return AcceptanceCheck::new(name, true, format!("exact: largest error {worst:.3e}"));
            }
            match r.fitted_order[j] {
                Some(k) => AcceptanceCheck::new(
                    name,
                    (k - want).abs() <= ORDER_WINDOW,
                    format!("fitted {k:.3}, expected {want} +- {ORDER_WINDOW}"),
                ),
                None => AcceptanceCheck::new(name, false, "fewer than three usable rows".into()),
            }
        })
        .collect()
}

fn diagnostic_check(r: &ConvergenceReport) -> AcceptanceCheck {
    let failed: Vec<String> = r
        .rows
        .iter()
        .filter(|row| row.ok())
        .flat_map(|row| {
            row.diagnostics
                .iter()
                .filter(|(_, c)| !c.pass)
                .map(move |(k, c)| format!("{k} at h={}: {:.3e} > {:.3e}", row.h, c.lhs, c.rhs))
        })
        .collect();
    let detail = if failed.is_empty() { "all checks hold".into() } else { failed.join("; ") };
    AcceptanceCheck::new(format!("{}_diagnostics", r.method), r.diagnostics_pass(), detail)
}

fn solver_check(r: &ConvergenceReport) -> AcceptanceCheck {
    let failed: Vec<String> = r
        .rows
        .iter()
        .filter_map(|row| row.failure.as_ref().map(|f| format!("h={}: {f}", row.h)))
        .collect();
    let detail = if failed.is_empty() { "every row solved".into() } else { failed.join("; ") };
    AcceptanceCheck::new(format!("{}_converged", r.method), failed.is_empty(), detail)
}

/// Runs the configured studies in method order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let curve = builtin_curve(&cfg.curve)?;
    let intervals = cfg.intervals()?;
    let mut reports = Vec::with_capacity(cfg.methods.len());
    let mut checks = Vec::new();
    for &method in &cfg.methods {
        let r = run_study(&curve, method, &intervals, &cfg.p, &cfg.solver)?;
        checks.push(solver_check(&r));
        checks.extend(order_checks(&r));
        checks.push(diagnostic_check(&r));
        reports.push(r);
    }
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        reports,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_config_is_default() {
        assert_eq!(ExperimentConfig::from_json(" \n").unwrap(), ExperimentConfig::default());
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn default_roundtrips_through_json() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let err = ExperimentConfig::from_json("{\n  \"curve\": \"sphere-wobble\",\n  \"methods\": [cubic]\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::from_json("{\n\n  \"bogus\": 1\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_bad_fields() {
        for text in [
            r#"{"curve": "spiral"}"#,
            r#"{"manifold": "sphere:3"}"#,
            r#"{"methods": []}"#,
            r#"{"methods": ["cubic", "cubic"]}"#,
            r#"{"h_ladder": [0.25, 0.5, 0.125]}"#,
            r#"{"h_ladder": [0.25, 0.125]}"#,
            r#"{"h_ladder": [0.3, 0.2, 0.1]}"#,
            r#"{"p": []}"#,
            r#"{"p": ["two"]}"#,
            r#"{"solver": {"grad_tol": 0}}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn intervals_from_ladder() {
        let cfg = ExperimentConfig {
            h_ladder: vec![0.5, 0.25, 0.2],
            ..Default::default()
        };
        assert_eq!(cfg.intervals().unwrap(), vec![2, 4, 5]);
    }

    #[test]
    fn geodesic_study_passes_as_exact() {
        let cfg = ExperimentConfig {
            curve: "sphere-greatcircle".into(),
            h_ladder: vec![0.5, 0.25, 0.125],
            ..Default::default()
        };
        let out = run_experiment(&cfg).unwrap();
        assert!(out.pass(), "{:#?}", out.checks);
        assert!(out.checks.iter().any(|c| c.detail.starts_with("exact")));
    }
}

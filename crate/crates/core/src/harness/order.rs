//! Convergence order estimates from `(h, error)` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
    /// `log2(e(h) / e(h/2))` for consecutive usable rows.
    pub step_orders: Vec<f64>,
}

/// Fits the convergence order. Rows with a nonpositive or non-finite error
/// are skipped; at least three usable rows are required.
pub fn fit_order(rows: &[(f64, f64)]) -> Result<OrderFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::config(format!(
            "order fit needs at least 3 usable rows, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let step_orders = pts.windows(2).map(|w| (w[0].1 - w[1].1) / (w[0].0 - w[1].0)).collect();
    Ok(OrderFit {
        order: sxy / sxx,
        step_orders,
    })
}

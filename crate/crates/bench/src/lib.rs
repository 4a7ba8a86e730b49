//! Fixtures shared by the benchmarks in `benches/`.

use geospline_core::harness::builtin_curve;
use geospline_core::jacobi::KnotValues;
use geospline_core::solver::{InterpolationProblem, SolverOptions};
use geospline_core::DiscreteCurve;

/// Knot data sampled from a built-in curve with `n` knot intervals and the
/// default fine grid.
pub fn problem(curve: &str, n: usize, cubic: bool) -> InterpolationProblem {
    let c = builtin_curve(curve).expect("built-in curve");
    let sub = SolverOptions::default().substeps_for(n);
    let knots = (0..=n).map(|i| c.point(i as f64 / n as f64)).collect();
    if cubic {
        InterpolationProblem::cubic(knots, c.velocity(0.0), c.velocity(1.0), sub).expect("valid problem")
    } else {
        InterpolationProblem::linear(knots, sub).expect("valid problem")
    }
}

/// A sampled curve with nonzero knot values for the Jacobi solve.
pub fn jacobi_fixture(n: usize, sub: usize) -> (DiscreteCurve, KnotValues) {
    let c = builtin_curve("sphere-wobble").expect("built-in curve");
    let curve = c.sample(n, sub).expect("sampled curve");
    let vals = curve
        .knot_indices()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let p = &curve.points()[k];
            let a = [p.coords()[1], -p.coords()[0], (i as f64).sin()];
            p.project_tangent(&a).expect("tangent")
        })
        .collect();
    let kv = KnotValues::new(&curve, vals).expect("knot values");
    (curve, kv)
}

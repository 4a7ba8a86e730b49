use geospline_core::curve::LpNorm;
use geospline_core::euclidean::euclidean_cubic_spline;
use geospline_core::harness::{builtin_curve, run_study, Method, CHECK_NAMES};
use geospline_core::solver::SolverOptions;

const NORMS: [LpNorm; 2] = [LpNorm::Finite(2.0), LpNorm::Infinity];

#[test]
fn linear_order_on_long_ladder() {
    let curve = builtin_curve("sphere-wobble").unwrap();
    let r = run_study(&curve, Method::Linear, &[4, 8, 16, 32, 64], &[LpNorm::Infinity], &SolverOptions::default()).unwrap();
    let k = r.fitted_order[0].unwrap();
    assert!((1.8..=2.2).contains(&k), "{k}");
    assert_eq!(r.step_orders[0].len(), 4);
    assert!(r.step_orders[0].iter().all(|s| (1.7..=2.3).contains(s)), "{:?}", r.step_orders);
}

#[test]
fn flat_study_matches_oracle_errors() {
    let curve = builtin_curve("euclidean-sine").unwrap();
    let ns = [4usize, 8, 16];
    let r = run_study(&curve, Method::Cubic, &ns, &[LpNorm::Infinity], &SolverOptions::default()).unwrap();
    for (row, &n) in r.rows.iter().zip(&ns) {
        let h = 1.0 / n as f64;
        let knots: Vec<Vec<f64>> = (0..=n).map(|i| curve.point(i as f64 * h).coords().to_vec()).collect();
        let s = euclidean_cubic_spline(&knots, curve.velocity(0.0).vec(), curve.velocity(1.0).vec(), h).unwrap();
        let m = n * row.substeps;
        let oracle_err = (0..=m)
            .map(|k| {
                let t = k as f64 / m as f64;
                let y = s.evaluate(t).unwrap();
                let g = curve.point(t);
                ((y[0] - g.coords()[0]).powi(2) + (y[1] - g.coords()[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        assert!((row.errors[0] - oracle_err).abs() <= 1e-8, "h={h}: {} vs {oracle_err}", row.errors[0]);
    }
}

#[test]
fn geodesic_data_is_reproduced() {
    let curve = builtin_curve("sphere-greatcircle").unwrap();
    for method in [Method::Linear, Method::Cubic] {
        let r = run_study(&curve, method, &[4, 8, 16], &NORMS, &SolverOptions::default()).unwrap();
        for row in &r.rows {
            assert!(row.errors.iter().all(|&e| e <= 1e-9), "{method} h={}: {:?}", row.h, row.errors);
        }
    }
}

#[test]
fn report_csv_is_deterministic() {
    let curve = builtin_curve("hyperbolic-arc").unwrap();
    let csv = || {
        let r = run_study(&curve, Method::Cubic, &[4, 8, 16], &NORMS, &SolverOptions::default()).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out, true).unwrap();
        String::from_utf8(out).unwrap()
    };
    let first = csv();
    assert_eq!(first, csv());
    let mut lines = first.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 7 + 3 * CHECK_NAMES.len());
    assert_eq!(lines.clone().count(), 6);
    assert!(lines.all(|l| l.starts_with("cubic,hyperbolic:2,hyperbolic-arc,")));
}

#[test]
fn failed_solves_are_flagged_rows() {
    let curve = builtin_curve("sphere-wobble").unwrap();
    let opts = SolverOptions {
        max_iters: 1,
        ..Default::default()
    };
    let r = run_study(&curve, Method::Cubic, &[4, 8, 16], &NORMS, &opts).unwrap();
    assert_eq!(r.failed_rows(), 3);
    assert!(r.rows.iter().all(|row| row.errors.iter().all(|e| e.is_nan()) && row.stats.is_some()));
    assert_eq!(r.fitted_order, vec![None, None]);
}

#[test]
fn ladder_must_be_refining() {
    let curve = builtin_curve("sphere-wobble").unwrap();
    assert!(run_study(&curve, Method::Linear, &[8, 4, 16], &NORMS, &SolverOptions::default()).is_err());
    assert!(run_study(&curve, Method::Linear, &[4, 8], &[], &SolverOptions::default()).is_err());
}

#[test]
fn per_row_iteration_logs() {
    let dir = std::env::temp_dir().join(format!("geospline-logs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let opts = SolverOptions {
        log_path: Some(dir.join("iters.csv")),
        ..Default::default()
    };
    let curve = builtin_curve("sphere-wobble").unwrap();
    run_study(&curve, Method::Cubic, &[4, 8, 16], &NORMS, &opts).unwrap();
    for n in [4, 8, 16] {
        let text = std::fs::read_to_string(dir.join(format!("iters-cubic-n{n}.csv"))).unwrap();
        assert!(text.starts_with("iteration,energy,gradient_norm"));
        assert!(text.lines().count() >= 2);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

use geospline_core::euclidean::euclidean_cubic_spline;
use geospline_core::jacobi::{jacobi_interpolate, KnotValues};
use geospline_core::solver::{cubic_spline, linear_spline, InterpolationProblem, SolverOptions};
use geospline_core::{DiscreteCurve, Manifold, ManifoldPoint, TangentVector};
use proptest::prelude::*;

fn curved() -> impl Strategy<Value = Manifold> {
    prop_oneof![
        Just(Manifold::Sphere { dim: 2 }),
        Just(Manifold::Sphere { dim: 3 }),
        Just(Manifold::Hyperbolic { dim: 2 }),
        Just(Manifold::Hyperbolic { dim: 3 }),
    ]
}

fn ambient(m: Manifold) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, m.ambient_dim())
}

/// A point from an ambient vector: normalized on the sphere, the exponential
/// from the vertex on the hyperboloid.
fn point(m: Manifold, a: &[f64]) -> Vec<f64> {
    match m {
        Manifold::Hyperbolic { .. } => {
            let mut o = vec![0.0; a.len()];
            o[0] = 1.0;
            on(m, m.exp_raw(&o, &m.project_raw(&o, a)))
        }
        _ => {
            let mut p = a.to_vec();
            if p.iter().all(|x| x.abs() < 1e-3) {
                p[0] = 1.0;
            }
            m.normalize_raw(&mut p);
            p
        }
    }
}

/// Renormalized onto the constraint surface, as the typed API does after
/// every update.
fn on(m: Manifold, mut x: Vec<f64>) -> Vec<f64> {
    m.normalize_raw(&mut x);
    x
}

fn norm(m: Manifold, v: &[f64]) -> f64 {
    m.dot(v, v).max(0.0).sqrt()
}

/// Tangent projection of `a` at `p`, shortened to length at most 1.5. On the
/// hyperboloid the projection can be long, and coordinates grow like cosh of
/// the distance from the vertex.
fn step(m: Manifold, p: &[f64], a: &[f64]) -> Vec<f64> {
    let v = m.project_raw(p, a);
    let len = norm(m, &v);
    let s = if len > 1.5 { 1.5 / len } else { 1.0 };
    v.into_iter().map(|x| s * x).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn manifold_case() -> impl Strategy<Value = (Manifold, Vec<f64>, Vec<f64>, Vec<f64>)> {
    curved().prop_flat_map(|m| (Just(m), ambient(m), ambient(m), ambient(m)))
}

proptest! {
    #[test]
    fn gauss_property((m, a, b, _) in manifold_case(), t in 0.01f64..1.0) {
        let p = point(m, &a);
        let v = step(m, &p, &b);
        let q = on(m, m.exp_raw(&p, &v.iter().map(|x| t * x).collect::<Vec<_>>()));
        prop_assert!((m.dist_raw(&p, &q) - t * norm(m, &v)).abs() <= 1e-10);
    }

    #[test]
    fn log_inverts_exp((m, a, b, _) in manifold_case()) {
        let p = point(m, &a);
        let v = step(m, &p, &b);
        let q = on(m, m.exp_raw(&p, &v));
        prop_assert!(max_diff(&m.log_raw(&p, &q), &v) <= 1e-9);
        prop_assert!((norm(m, &m.log_raw(&p, &q)) - m.dist_raw(&p, &q)).abs() <= 1e-12);
    }

    #[test]
    fn distance_is_symmetric((m, a, b, _) in manifold_case()) {
        let (p, q) = (point(m, &a), point(m, &b));
        prop_assert!((m.dist_raw(&p, &q) - m.dist_raw(&q, &p)).abs() <= 1e-12);
        prop_assert!(m.dist_raw(&p, &p) <= 1e-12);
    }

    #[test]
    fn transport_there_and_back((m, a, b, c) in manifold_case()) {
        let p = point(m, &a);
        let q = on(m, m.exp_raw(&p, &step(m, &p, &b)));
        let v = m.project_raw(&p, &c);
        let w = m.transport_raw(&p, &q, &v);
        prop_assert!(m.dot(&q, &w).abs() <= 1e-12);
        prop_assert!((norm(m, &w) - norm(m, &v)).abs() <= 1e-12);
        prop_assert!(max_diff(&m.transport_raw(&q, &p, &w), &v) <= 1e-10);
    }
}

fn plane_problem(ys: &[f64], v0: f64, v1: f64, sub: usize) -> InterpolationProblem {
    let m = Manifold::Euclidean { dim: 2 };
    let n = ys.len() - 1;
    let pts: Vec<ManifoldPoint> = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| ManifoldPoint::new(m, vec![i as f64 / n as f64, y]).unwrap())
        .collect();
    let vs = TangentVector::new(pts[0].clone(), vec![1.0, v0]).unwrap();
    let ve = TangentVector::new(pts[n].clone(), vec![1.0, v1]).unwrap();
    InterpolationProblem::cubic(pts, vs, ve, sub).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flat_solver_matches_oracle(
        ys in prop::collection::vec(-0.1f64..0.1, 3..8),
        v0 in -0.3f64..0.3,
        v1 in -0.3f64..0.3,
    ) {
        let n = ys.len() - 1;
        let prob = plane_problem(&ys, v0, v1, 16);
        let (c, stats) = cubic_spline(&prob, &SolverOptions::default()).unwrap();
        prop_assert!(stats.converged);
        let knots: Vec<Vec<f64>> = prob.knot_points().iter().map(|p| p.coords().to_vec()).collect();
        let oracle = euclidean_cubic_spline(&knots, &[1.0, v0], &[1.0, v1], 1.0 / n as f64).unwrap();
        for (p, &t) in c.points().iter().zip(c.times()) {
            prop_assert!(max_diff(p.coords(), &oracle.evaluate(t).unwrap()) <= 1e-8);
        }
    }

    #[test]
    fn linear_spline_is_piecewise_geodesic((m, a, b, _) in manifold_case(), n in 1usize..5) {
        let p = point(m, &a);
        let v = step(m, &p, &b);
        let knots: Vec<ManifoldPoint> = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                let u: Vec<f64> = v.iter().map(|x| s * x).collect();
                let mut x = m.exp_raw(&p, &u);
                // bend the curve so the segments are not one geodesic
                x[0] += 0.05 * (s * 7.0).sin();
                m.normalize_raw(&mut x);
                ManifoldPoint::new(m, x).unwrap()
            })
            .collect();
        let prob = InterpolationProblem::linear(knots.clone(), 8).unwrap();
        let c = linear_spline(&prob).unwrap();
        for (i, &k) in c.knot_indices().iter().enumerate() {
            prop_assert_eq!(c.points()[k].coords(), knots[i].coords());
        }
        for (s, e) in c.segments() {
            let first = m.dist_raw(c.points()[s].coords(), c.points()[s + 1].coords());
            for k in s..e {
                let d = m.dist_raw(c.points()[k].coords(), c.points()[k + 1].coords());
                prop_assert!((d - first).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_interpolation_is_linear(
        w1 in prop::collection::vec(-1.0f64..1.0, 12),
        w2 in prop::collection::vec(-1.0f64..1.0, 12),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let m = Manifold::Sphere { dim: 2 };
        let c = DiscreteCurve::sample(m, 3, 16, |t| {
            let (th, ph) = (1.1 + 0.3 * t * t, 1.4 * t);
            ManifoldPoint::new(m, vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
        })
        .unwrap();
        let kv = |w: &[f64]| {
            let vals = c
                .knot_indices()
                .iter()
                .enumerate()
                .map(|(i, &k)| c.points()[k].project_tangent(&w[3 * i..3 * i + 3]).unwrap())
                .collect();
            KnotValues::new(&c, vals).unwrap()
        };
        let (k1, k2) = (kv(&w1), kv(&w2));
        let mixed: Vec<TangentVector> =
            k1.values().iter().zip(k2.values()).map(|(x, y)| x.combine(a, y, b).unwrap()).collect();
        let lhs = jacobi_interpolate(&c, &KnotValues::new(&c, mixed).unwrap()).unwrap();
        let (l1, l2) = (jacobi_interpolate(&c, &k1).unwrap(), jacobi_interpolate(&c, &k2).unwrap());
        for ((x, y), z) in lhs.vectors().iter().zip(l1.vectors()).zip(l2.vectors()) {
            let rhs: Vec<f64> = y.vec().iter().zip(z.vec()).map(|(p, q)| a * p + b * q).collect();
            prop_assert!(max_diff(x.vec(), &rhs) <= 1e-12);
        }
    }
}

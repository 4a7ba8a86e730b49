//! Exact cubic spline interpolation in R^d through the uniform cubic
//! B-spline basis.

use crate::error::{Error, Result};

/// Uniform cubic B-spline centred at 0, supported on `[-2, 2]`.
pub fn bspline_basis(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        (3.0 * a * a * a - 6.0 * a * a + 4.0) / 6.0
    } else if a <= 2.0 {
        let r = 2.0 - a;
        r * r * r / 6.0
    } else {
        0.0
    }
}

fn bspline_d1(t: f64) -> f64 {
    let a = t.abs();
    let s = t.signum();
    if a <= 1.0 {
        s * (9.0 * a * a - 12.0 * a) / 6.0
    } else if a <= 2.0 {
        -s * (2.0 - a) * (2.0 - a) / 2.0
    } else {
        0.0
    }
}

fn bspline_d2(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        3.0 * a - 2.0
    } else if a <= 2.0 {
        2.0 - a
    } else {
        0.0
    }
}

/// Control points `x_{-1}, ..., x_{N+1}` of `sum_i x_i B(t/h - i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BSplineCoefficients {
    control: Vec<Vec<f64>>,
    h: f64,
}

impl BSplineCoefficients {
    pub fn new(control: Vec<Vec<f64>>, h: f64) -> Result<Self> {
        if control.len() < 4 {
            return Err(Error::contract("need at least N + 3 = 4 control points"));
        }
        let n = (control.len() - 3) as f64;
        if (n * h - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!("{} control points do not match h = {h}", control.len())));
        }
        let d = control[0].len();
        if control.iter().any(|c| c.len() != d) {
            return Err(Error::contract("control points differ in dimension"));
        }
        Ok(Self { control, h })
    }

    pub fn control(&self) -> &[Vec<f64>] {
        &self.control
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of knot intervals `N`.
    pub fn intervals(&self) -> usize {
        self.control.len() - 3
    }

    fn combine(&self, t: f64, basis: fn(f64) -> f64, scale: f64) -> Result<Vec<f64>> {
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, 1]")));
        }
        let s = t / self.h;
        let n = self.intervals();
        let cell = (s.floor() as usize).min(n.saturating_sub(1));
        let mut out = vec![0.0; self.control[0].len()];
        // Only x_{cell-1} .. x_{cell+2} can be nonzero at s.
        for i in cell..cell + 4 {
            let w = basis(s - (i as f64 - 1.0)) * scale;
            out.iter_mut().zip(&self.control[i]).for_each(|(o, x)| *o += w * x);
        }
        Ok(out)
    }

    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        self.combine(t, bspline_basis, 1.0)
    }

    pub fn derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.combine(t, bspline_d1, 1.0 / self.h)
    }

    pub fn second_derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.combine(t, bspline_d2, 1.0 / (self.h * self.h))
    }
}

/// Rows of the scaled system `6A`: `(sub, diag, super)` for row `r`,
/// `r = 0..N+2` standing for basis indices `-1..N+1`.
fn system_row(r: usize, last: usize) -> (f64, f64, f64) {
    if r == 0 {
        (0.0, 0.5, 1.0)
    } else if r == last {
        (1.0, 0.5, 0.0)
    } else {
        (1.0, 4.0, 1.0)
    }
}

/// The `(N+3) x (N+3)` interpolation matrix `A` as a dense matrix.
pub fn interpolation_matrix(n: usize) -> Vec<Vec<f64>> {
    let size = n + 3;
    let mut a = vec![vec![0.0; size]; size];
    for (r, row) in a.iter_mut().enumerate() {
        let (l, d, u) = system_row(r, size - 1);
        if r > 0 {
            row[r - 1] = l / 6.0;
        }
        row[r] = d / 6.0;
        if r + 1 < size {
            row[r + 1] = u / 6.0;
        }
    }
    a
}

/// Thomas elimination for `(6A) x = 6 b`, one right-hand side per column.
fn solve_tridiagonal(n: usize, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let size = n + 3;
    let last = size - 1;
    let d = rhs[0].len();
    let mut c = vec![0.0; size];
    let mut y = vec![vec![0.0; d]; size];
    for r in 0..size {
        let (l, diag, u) = system_row(r, last);
        let piv = if r == 0 { diag } else { diag - l * c[r - 1] };
        c[r] = u / piv;
        for j in 0..d {
            let prev = if r == 0 { 0.0 } else { y[r - 1][j] };
            y[r][j] = (6.0 * rhs[r][j] - l * prev) / piv;
        }
    }
    for r in (0..last).rev() {
        for j in 0..d {
            y[r][j] -= c[r] * y[r + 1][j];
        }
    }
    y
}

/// Clamped cubic spline through `knots` at `t_i = i h` with end derivatives
/// `v0` and `v1`.
pub fn euclidean_cubic_spline(knots: &[Vec<f64>], v0: &[f64], v1: &[f64], h: f64) -> Result<BSplineCoefficients> {
    if knots.len() < 2 {
        return Err(Error::config("need at least two knots"));
    }
    let n = knots.len() - 1;
    let d = knots[0].len();
    if knots.iter().any(|k| k.len() != d) || v0.len() != d || v1.len() != d {
        return Err(Error::contract("knots and end derivatives differ in dimension"));
    }
    let mut rhs = Vec::with_capacity(n + 3);
    rhs.push((0..d).map(|j| knots[0][j] / 4.0 - v0[j] * h / 12.0).collect());
    rhs.extend(knots.iter().cloned());
    rhs.push((0..d).map(|j| knots[n][j] / 4.0 + v1[j] * h / 12.0).collect());
    BSplineCoefficients::new(solve_tridiagonal(n, &rhs), h)
}

/// Gauss-Legendre rule of order 10 on `[-1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `int_0^1 <w, spline'' - gamma''> dt` with `w` the continuous piecewise
/// linear field through `w_knots` and Gauss quadrature on each knot interval.
pub fn galerkin_check<F>(spline: &BSplineCoefficients, gamma_dd: F, w_knots: &[Vec<f64>]) -> Result<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let n = spline.intervals();
    if w_knots.len() != n + 1 {
        return Err(Error::contract(format!("test field needs {} knot values", n + 1)));
    }
    let h = spline.h();
    let mut total = 0.0;
    for i in 0..n {
        let (t0, mid) = (i as f64 * h, (i as f64 + 0.5) * h);
        for (x, wt) in GAUSS5 {
            let t = mid + 0.5 * h * x;
            let s = (t - t0) / h;
            let sdd = spline.second_derivative(t)?;
            let gdd = gamma_dd(t);
            let inner: f64 = (0..sdd.len())
                .map(|j| ((1.0 - s) * w_knots[i][j] + s * w_knots[i + 1][j]) * (sdd[j] - gdd[j]))
                .sum();
            total += 0.5 * h * wt * inner;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn basis_values() {
        assert!((bspline_basis(0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((bspline_basis(1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((bspline_basis(-1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(bspline_basis(2.5), 0.0);
        assert_eq!(bspline_basis(2.0), 0.0);
    }

    #[test]
    fn basis_is_c2_at_breakpoints() {
        let e = 1e-7;
        for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            assert!((bspline_basis(t - e) - bspline_basis(t + e)).abs() < 1e-6);
            assert!((bspline_d1(t - e) - bspline_d1(t + e)).abs() < 1e-6);
            assert!((bspline_d2(t - e) - bspline_d2(t + e)).abs() < 1e-6);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let e = 1e-5;
        for t in [-1.7, -0.6, 0.3, 1.4] {
            let fd1 = (bspline_basis(t + e) - bspline_basis(t - e)) / (2.0 * e);
            let fd2 = (bspline_d1(t + e) - bspline_d1(t - e)) / (2.0 * e);
            assert!((fd1 - bspline_d1(t)).abs() < 1e-8);
            assert!((fd2 - bspline_d2(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn matrix_boundary_rows() {
        let a = interpolation_matrix(4);
        assert_eq!(a.len(), 7);
        assert!((a[0][0] - 1.0 / 12.0).abs() < 1e-16 && (a[0][1] - 1.0 / 6.0).abs() < 1e-16);
        assert!(a[0][2..].iter().all(|&x| x == 0.0));
        assert!((a[6][6] - 1.0 / 12.0).abs() < 1e-16 && (a[6][5] - 1.0 / 6.0).abs() < 1e-16);
        assert!((a[3][3] - 4.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn reproduces_cubic() {
        let n = 4;
        let knots: Vec<Vec<f64>> = (0..=n).map(|i| vec![(i as f64 / n as f64).powi(3)]).collect();
        let s = euclidean_cubic_spline(&knots, &[0.0], &[3.0], 0.25).unwrap();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((s.evaluate(t).unwrap()[0] - t.powi(3)).abs() < 1e-12);
        }
        let e = 1e-6;
        let fd = (s.evaluate(e).unwrap()[0] - s.evaluate(0.0).unwrap()[0]) / e;
        assert!(fd.abs() < 1e-8);
        assert!(s.derivative(0.0).unwrap()[0].abs() < 1e-12);
        assert!((s.derivative(1.0).unwrap()[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let knots = vec![vec![2.0, -1.0]; 6];
        let s = euclidean_cubic_spline(&knots, &[0.0, 0.0], &[0.0, 0.0], 0.2).unwrap();
        for k in 0..=20 {
            assert!(close(&s.evaluate(k as f64 / 20.0).unwrap(), &[2.0, -1.0], 1e-14));
        }
    }

    #[test]
    fn partition_of_unity() {
        let s = BSplineCoefficients::new(vec![vec![1.0]; 8], 0.2).unwrap();
        for k in 0..=50 {
            assert!((s.evaluate(k as f64 / 50.0).unwrap()[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn evaluate_rejects_outside() {
        let s = BSplineCoefficients::new(vec![vec![1.0]; 5], 0.5).unwrap();
        assert!(matches!(s.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(s.evaluate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn interpolates_and_matches_end_slopes() {
        let n = 8;
        let h = 1.0 / n as f64;
        let f = |t: f64| vec![(2.0 * PI * t).sin(), (3.0 * PI * t).cos()];
        let knots: Vec<_> = (0..=n).map(|i| f(i as f64 * h)).collect();
        let v0 = vec![2.0 * PI, 0.0];
        let v1 = vec![2.0 * PI, 0.0];
        let s = euclidean_cubic_spline(&knots, &v0, &v1, h).unwrap();
        for (i, k) in knots.iter().enumerate() {
            assert!(close(&s.evaluate(i as f64 * h).unwrap(), k, 1e-12));
        }
        assert!(close(&s.derivative(0.0).unwrap(), &v0, 1e-10));
        assert!(close(&s.derivative(1.0).unwrap(), &v1, 1e-10));
    }

    fn sup_error(n: usize, f: impl Fn(f64) -> Vec<f64>, df: impl Fn(f64) -> Vec<f64>) -> f64 {
        let h = 1.0 / n as f64;
        let knots: Vec<_> = (0..=n).map(|i| f(i as f64 * h)).collect();
        let s = euclidean_cubic_spline(&knots, &df(0.0), &df(1.0), h).unwrap();
        (0..=4000)
            .map(|k| {
                let t = k as f64 / 4000.0;
                let (a, b) = (s.evaluate(t).unwrap(), f(t));
                a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn quartic_convergence_in_the_plane() {
        let f = |t: f64| vec![(2.0 * PI * t).sin(), (3.0 * PI * t).cos()];
        let df = |t: f64| vec![2.0 * PI * (2.0 * PI * t).cos(), -3.0 * PI * (3.0 * PI * t).sin()];
        let errs: Vec<f64> = [4, 8, 16, 32, 64].iter().map(|&n| sup_error(n, f, df)).collect();
        // cos(3 pi t) is pre-asymptotic on the coarsest grids
        for w in errs[2..].windows(2) {
            let r = w[0] / w[1];
            assert!((13.0..=19.0).contains(&r), "{errs:?}");
        }
        let rows: Vec<_> = [4, 8, 16, 32, 64].iter().zip(&errs).map(|(&n, &e)| (1.0 / n as f64, e)).collect();
        let order = crate::harness::fit_order(&rows).unwrap().order;
        assert!((order - 4.0).abs() < 0.4, "{order}");
    }

    #[test]
    fn inverse_decays_geometrically() {
        // Inverse of the unscaled 6A restricted to the knot rows.
        let n = 12;
        let size = n + 3;
        for j in 0..size {
            let mut e = vec![vec![0.0]; size];
            e[j][0] = 1.0 / 6.0;
            let col = solve_tridiagonal(n, &e);
            if j == 0 || j == size - 1 {
                continue;
            }
            for k in 1..size - 1 {
                let bound = 3f64.powi(-((k as i32 - j as i32).abs())) + 1e-12;
                assert!(col[k][0].abs() <= bound, "({j},{k}) {}", col[k][0]);
            }
        }
    }

    #[test]
    fn galerkin_vanishes_for_spline_data() {
        let n = 4;
        let h = 0.25;
        let knots: Vec<_> = (0..=n).map(|i| vec![(i as f64 * h).powi(3)]).collect();
        let s = euclidean_cubic_spline(&knots, &[0.0], &[3.0], h).unwrap();
        let w: Vec<_> = (0..=n).map(|i| vec![1.0 + i as f64]).collect();
        assert!(galerkin_check(&s, |t| vec![6.0 * t], &w).unwrap().abs() < 1e-13);
        let zero = vec![vec![0.0]; n + 1];
        assert_eq!(galerkin_check(&s, |t| vec![6.0 * t], &zero).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn galerkin_orthogonality_for_sine(w in prop::collection::vec(-1.0f64..1.0, 9)) {
            let n = 8;
            let h = 1.0 / n as f64;
            let knots: Vec<_> = (0..=n).map(|i| vec![(2.0 * PI * i as f64 * h).sin()]).collect();
            let s = euclidean_cubic_spline(&knots, &[2.0 * PI], &[2.0 * PI], h).unwrap();
            let w: Vec<_> = w.into_iter().map(|x| vec![x]).collect();
            let g = galerkin_check(&s, |t| vec![-4.0 * PI * PI * (2.0 * PI * t).sin()], &w).unwrap();
            prop_assert!(g.abs() <= 1e-8, "{}", g);
        }
    }
}

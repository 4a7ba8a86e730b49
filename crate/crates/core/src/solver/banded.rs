//! Symmetric positive definite banded matrices with an in-place Cholesky
//! factorization.

/// Lower band of a symmetric matrix. Entry `(i, j)` with `j <= i <= j + bw`
/// lives at `data[i * (bw + 1) + (i - j)]`.
#[derive(Clone, Debug)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

/// The matrix was not numerically positive definite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `x` to `(i, j)` (and implicitly to `(j, i)`).
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += x;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Largest diagonal entry.
    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.data[self.idx(i, i)]).fold(0.0, f64::max)
    }

    pub fn add_diag(&mut self, mu: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += mu;
        }
    }

    /// Cholesky factor `L` with `A = L L^T`, stored in the same layout.
    pub fn cholesky(&self) -> Result<BandedCholesky, NotPositiveDefinite> {
        let mut l = self.clone();
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l.data[l.idx(i, j)];
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= l.data[l.idx(i, k)] * l.data[l.idx(j, k)];
                }
                let at = l.idx(i, j);
                if i == j {
                    if !(s > 0.0) {
                        return Err(NotPositiveDefinite { row: i, pivot: s });
                    }
                    l.data[at] = s.sqrt();
                } else {
                    l.data[at] = s / l.data[l.idx(j, j)];
                }
            }
        }
        Ok(BandedCholesky { l })
    }
}

#[derive(Clone, Debug)]
pub struct BandedCholesky {
    l: BandedSpd,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.data[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= l.data[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_tridiagonal_laplacian() {
        let n = 50;
        let mut a = BandedSpd::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let got = a.cholesky().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn random_banded_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for bw in [0, 2, 5, 11] {
            let n = 40;
            let mut a = BandedSpd::zeros(n, bw);
            for i in 0..n {
                for j in i.saturating_sub(bw)..i {
                    a.add(i, j, rng.random_range(-1.0..1.0));
                }
                a.add(i, i, 2.0 * bw as f64 + 1.0);
            }
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let got = a.cholesky().unwrap().solve(&a.mul_vec(&x));
            let err = got.iter().zip(&x).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "bw {bw}: {err}");
        }
    }

    #[test]
    fn detects_indefinite() {
        let mut a = BandedSpd::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(2, 2, 1.0);
        a.add(1, 0, 2.0);
        assert_eq!(a.cholesky().unwrap_err().row, 1);
    }

    #[test]
    fn band_accessors() {
        let mut a = BandedSpd::zeros(4, 1);
        a.add(0, 1, 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(3, 0), 0.0);
        a.add_diag(2.0);
        assert_eq!(a.max_diag(), 2.0);
        assert_eq!((a.size(), a.bandwidth()), (4, 1));
    }
}

//! Banded symmetric positive definite matrices.

/// Lower band of a symmetric `n × n` matrix with half-bandwidth `bw`.
/// Row `i` stores columns `i - bw ..= i` contiguously.
#[derive(Clone, Debug)]
pub(crate) struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.data[self.at(i, i)]).fold(0.0, f64::max)
    }

    pub fn shift_diag(&mut self, s: f64) {
        for i in 0..self.n {
            let k = self.at(i, i);
            self.data[k] += s;
        }
    }

    /// In-place Cholesky factor `L` with `A = L Lᵀ`. Returns the failing
    /// pivot row on loss of positive definiteness.
    pub fn cholesky(mut self) -> Result<CholeskyBand, usize> {
        let bw = self.bw;
        let w = bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let start = lo.max(j.saturating_sub(bw));
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                let mut sum = self.data[ri + j];
                for k in start..j {
                    sum -= self.data[ri + k] * self.data[rj + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(i);
                    }
                    self.data[ri + j] = sum.sqrt();
                } else {
                    self.data[ri + j] = sum / self.data[rj + j];
                }
            }
        }
        Ok(CholeskyBand { inner: self })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CholeskyBand {
    inner: BandedSpd,
}

impl CholeskyBand {
    /// Overwrites `b` with `A⁻¹ b`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &mut [f64]) {
        let a = &self.inner;
        let w = a.bw + 1;
        for i in 0..a.n {
            let ri = i * w + a.bw - i;
            let mut s = b[i];
            for k in i.saturating_sub(a.bw)..i {
                s -= a.data[ri + k] * b[k];
            }
            b[i] = s / a.data[ri + i];
        }
        for i in (0..a.n).rev() {
            let mut s = b[i];
            for k in i + 1..a.n.min(i + a.bw + 1) {
                let rk = k * w + a.bw - k;
                s -= a.data[rk + i] * b[k];
            }
            let ri = i * w + a.bw - i;
            b[i] = s / a.data[ri + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 }
            })
            .collect();
        a.cholesky().unwrap().solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn wider_band_matches_dense() {
        // 2-D five-point Laplacian on a 4 × 5 interior grid
        let (nx, ny) = (4, 5);
        let n = nx * ny;
        let mut a = BandedSpd::zeros(n, ny);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                a.add(k, k, 4.0 + 0.1 * k as f64);
                dense[k][k] = 4.0 + 0.1 * k as f64;
                if j > 0 {
                    a.add(k, k - 1, -1.0);
                    dense[k][k - 1] = -1.0;
                    dense[k - 1][k] = -1.0;
                }
                if i > 0 {
                    a.add(k, k - ny, -1.0);
                    dense[k][k - ny] = -1.0;
                    dense[k - ny][k] = -1.0;
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut b: Vec<f64> = (0..n).map(|r| (0..n).map(|c| dense[r][c] * x[c]).sum()).collect();
        a.cholesky().unwrap().solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn detects_indefinite() {
        let mut a = BandedSpd::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        a.add(2, 2, 1.0);
        assert_eq!(a.cholesky().unwrap_err(), 1);
    }
}

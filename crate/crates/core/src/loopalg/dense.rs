//! Dense complex linear algebra for the factorization finite sections.

use crate::error::{Error, Result};
use crate::scalar::{re, Cx, Real};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S: Real> {
    pub n: usize,
    pub data: Vec<Cx<S>>,
}

impl<S: Real> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![re(S::zero()); n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> Cx<S> {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cx<S>) {
        self.data[i * self.n + j] = v;
    }

    /// Lower-triangular `L` with positive real diagonal and `A = L L†`.
    pub fn cholesky(&self) -> Result<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if !(d > S::zero()) || !d.is_finite() {
                return Err(Error::Factorization { op: "dense::cholesky", msg: format!("pivot {j} is not positive ({d})") });
            }
            let djj = d.sqrt();
            l.set(j, j, re(djj));
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(l)
    }

    /// Solves `A X = B` for `m` right-hand sides given column-major in `rhs` (length `n·m`),
    /// by Gaussian elimination with partial pivoting. Also returns `min|pivot| / max|pivot|`.
    pub fn solve(&self, rhs: &[Cx<S>], m: usize) -> Result<(Vec<Cx<S>>, S)> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let (mut pmin, mut pmax) = (S::infinity(), S::zero());
        for k in 0..n {
            let (p, mag) = (k..n).map(|i| (i, a[i * n + k].norm())).fold((k, -S::one()), |best, c| if c.1 > best.1 { c } else { best });
            pmin = pmin.min(mag);
            pmax = pmax.max(mag);
            if mag == S::zero() || !mag.is_finite() {
                return Err(Error::Factorization { op: "dense::solve", msg: format!("singular at column {k}") });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                for c in 0..m {
                    b.swap(c * n + k, c * n + p);
                }
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f.norm() == S::zero() {
                    continue;
                }
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
                for c in 0..m {
                    let t = b[c * n + k];
                    b[c * n + i] -= f * t;
                }
            }
        }
        for c in 0..m {
            for k in (0..n).rev() {
                let mut s = b[c * n + k];
                for j in k + 1..n {
                    s -= a[k * n + j] * b[c * n + j];
                }
                b[c * n + k] = s / a[k * n + k];
            }
        }
        Ok((b, pmin / pmax))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn cholesky_reproduces_hermitian_matrix() {
        let mut a = DenseMatrix::zeros(3);
        let v = [[c64(4.0, 0.0), c64(1.0, 1.0), c64(0.0, -0.5)], [c64(1.0, -1.0), c64(3.0, 0.0), c64(0.2, 0.0)], [c64(0.0, 0.5), c64(0.2, 0.0), c64(2.0, 0.0)]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, v[i][j]);
            }
        }
        let l = a.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: num_complex::Complex64 = (0..3).map(|k| l.get(i, k) * l.get(j, k).conj()).sum();
                assert!((s - v[i][j]).norm() < 1e-14);
            }
        }
        a.set(2, 2, c64(-5.0, 0.0));
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 0, c64(0.0, 0.0));
        a.set(0, 1, c64(1.0, 1.0));
        a.set(1, 0, c64(2.0, 0.0));
        a.set(1, 1, c64(0.5, 0.0));
        let x = [c64(1.0, -1.0), c64(0.3, 2.0)];
        let b = [a.get(0, 0) * x[0] + a.get(0, 1) * x[1], a.get(1, 0) * x[0] + a.get(1, 1) * x[1]];
        let (s, ratio) = a.solve(&b, 1).unwrap();
        assert!((s[0] - x[0]).norm() < 1e-14 && (s[1] - x[1]).norm() < 1e-14);
        assert!(ratio > 0.1);
    }
}

//! Dense-free kernels for the symmetric banded systems produced on structured grids.

// Band kernels index rows and columns by position on purpose.
#![allow(clippy::needless_range_loop)]

use crate::error::GridError;

/// Symmetric matrix with half-bandwidth `bw`, lower triangle stored row-wise.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    // entry (i, j), j <= i, lives at i * (bw + 1) + (i - j)
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    /// Replaces row and column `i` by the identity row.
    pub fn pin(&mut self, i: usize) {
        let lo = i.saturating_sub(self.bw);
        for j in lo..i {
            let s = self.slot(i, j);
            self.data[s] = 0.0;
        }
        let hi = (i + self.bw).min(self.n - 1);
        for r in i + 1..=hi {
            let s = self.slot(r, i);
            self.data[s] = 0.0;
        }
        let s = self.slot(i, i);
        self.data[s] = 1.0;
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn factor(mut self) -> Result<BandCholesky, GridError> {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.data[self.slot(i, j)];
                let kstart = lo.max(j.saturating_sub(bw));
                for k in kstart..j {
                    s -= self.data[self.slot(i, k)] * self.data[self.slot(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(GridError::NotPositiveDefinite { row: i, pivot: s });
                    }
                    let slot = self.slot(i, i);
                    self.data[slot] = s.sqrt();
                } else {
                    let slot = self.slot(i, j);
                    self.data[slot] = s / self.data[self.slot(j, j)];
                }
            }
        }
        Ok(BandCholesky { factor: self })
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = 0.0;
            for j in lo..=hi {
                s += self.get(i, j) * x[j];
            }
            *yi = s;
        }
    }
}

/// A banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    factor: BandMatrix,
}

impl BandCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let (n, bw) = (l.n, l.bw);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= l.data[l.slot(i, k)] * y[k];
            }
            y[i] = s / l.data[l.slot(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = y[i];
            for r in i + 1..=hi {
                s -= l.data[l.slot(r, i)] * y[r];
            }
            y[i] = s / l.data[l.slot(i, i)];
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite operator.
///
/// Stops when `|b - A x| <= tol * |b|`. Iteration order is fixed, so results are
/// bitwise reproducible.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), GridError> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let b_norm = norm2(rhs);
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(GridError::NotPositiveDefinite { row: it, pivot: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm2(&r) / b_norm;
        if res <= tol {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    apply(&x, &mut ap);
    let res = ap.iter().zip(rhs).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / b_norm;
    Err(GridError::NotConverged { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_like(n: usize, bw: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 4.0 + i as f64 * 0.01);
            if i >= 1 {
                a.add(i, i - 1, -1.0);
            }
            if i >= bw {
                a.add(i, i - bw, -1.0);
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_banded_system() {
        let a = laplacian_like(30, 5);
        let x_true: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 30];
        a.apply(&x_true, &mut b);
        let x = a.clone().factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.factor(), Err(GridError::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn pin_decouples_row() {
        let mut a = laplacian_like(6, 2);
        a.pin(2);
        assert_eq!(a.get(2, 2), 1.0);
        assert_eq!(a.get(2, 1), 0.0);
        assert_eq!(a.get(3, 2), 0.0);
        assert_eq!(a.get(3, 4), -1.0);
    }

    #[test]
    fn pcg_matches_cholesky() {
        let a = laplacian_like(40, 7);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + (i as f64).cos()).collect();
        let direct = a.clone().factor().unwrap().solve(&b);
        let diag: Vec<f64> = (0..40).map(|i| a.get(i, i)).collect();
        let (x, iters) = pcg(|x, y| a.apply(x, y), &diag, &b, 1e-13, 200).unwrap();
        assert!(iters > 0);
        for (u, v) in x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn pcg_reports_non_convergence() {
        let a = laplacian_like(40, 7);
        let b = vec![1.0; 40];
        let diag: Vec<f64> = (0..40).map(|i| a.get(i, i)).collect();
        let res = pcg(|x, y| a.apply(x, y), &diag, &b, 1e-14, 2);
        assert!(matches!(res, Err(GridError::NotConverged { iterations: 2, .. })));
    }
}

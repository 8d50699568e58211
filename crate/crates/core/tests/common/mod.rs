//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// 1D stiffness matrix with uniform conductance `1/h` and Robin mass `gamma` on both ends.
pub fn dense_stiffness_1d(cells: usize, length: f64, gamma: f64) -> DMatrix<f64> {
    let n = cells + 1;
    let h = length / cells as f64;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..cells {
        k[(i, i)] += 1.0 / h;
        k[(i + 1, i + 1)] += 1.0 / h;
        k[(i, i + 1)] -= 1.0 / h;
        k[(i + 1, i)] -= 1.0 / h;
    }
    k[(0, 0)] += gamma;
    k[(n - 1, n - 1)] += gamma;
    k
}

/// Trapezoid weights of a uniform 1D grid.
pub fn lumped_mass_1d(cells: usize, length: f64) -> DVector<f64> {
    let h = length / cells as f64;
    DVector::from_fn(cells + 1, |i, _| if i == 0 || i == cells { h / 2.0 } else { h })
}

/// Solves `(M/dt + K_gamma diag(1 + chi)) u = M u_prev / dt` by dense LU.
pub fn dense_pressure_1d(
    cells: usize,
    length: f64,
    gamma: f64,
    u_prev: &[f64],
    chi: &[f64],
    dt: f64,
) -> Vec<f64> {
    let k = dense_stiffness_1d(cells, length, gamma);
    let m = lumped_mass_1d(cells, length);
    let n = cells + 1;
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 1.0 + chi[i]));
    let a = DMatrix::from_diagonal(&(&m / dt)) + k * d;
    let b = DVector::from_fn(n, |i, _| m[i] * u_prev[i] / dt);
    a.lu().solve(&b).expect("nonsingular").iter().copied().collect()
}

/// Minimizes the convex step energy of the phase update over the box `[0, 1]^n`
/// by projected gradient descent run to stagnation.
///
/// `E(x) = a/2 |x - xp|_M^2 + b/2 (x - xp)' K (x - xp) + 1/2 x' K x + sum M hatbeta(x) - sum M g x`
/// with `a = mu / dt`, `b = nu / dt`.
pub fn projected_gradient_phase_1d(
    cells: usize,
    length: f64,
    chi_prev: &[f64],
    g: &[f64],
    mu: f64,
    nu: f64,
    dt: f64,
) -> Vec<f64> {
    let k = dense_stiffness_1d(cells, length, 0.0);
    let m = lumped_mass_1d(cells, length);
    let n = cells + 1;
    let (a, b) = (mu / dt, nu / dt);
    let lipschitz = (0..n)
        .map(|i| m[i] * (a + 1.0) + (1.0 + b) * (0..n).map(|j| k[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let xp = DVector::from_column_slice(chi_prev);
    let mut x = xp.clone();
    for _ in 0..2_000_000 {
        let grad = (&k * (&x - &xp)) * b
            + &k * &x
            + DVector::from_fn(n, |i, _| m[i] * (a * (x[i] - xp[i]) + x[i].ln_1p() - g[i]));
        let next = DVector::from_fn(n, |i, _| (x[i] - step * grad[i]).clamp(0.0, 1.0));
        let moved = (&next - &x).amax();
        x = next;
        if moved < 1e-16 {
            break;
        }
    }
    x.iter().copied().collect()
}

/// Root of a strictly increasing scalar function by bisection on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) < 0.0 && f(hi) > 0.0, "bracket does not straddle the root");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

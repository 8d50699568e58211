use std::sync::Arc;

use super::linalg::BandMatrix;
use super::Grid;
use crate::error::GridError;

/// Stiffness matrix of the form `<A_gamma v, w> = int grad v . grad w + gamma int_Gamma v w`.
///
/// Assembled by vertex-centred finite volumes: each pair of neighbouring nodes is
/// joined by a conductance `face / spacing`, and the Robin term is lumped onto
/// boundary nodes with their boundary measure. The matrix is symmetric, has
/// non-positive off-diagonal entries and non-negative row sums (zero when
/// `gamma = 0`), so `diag(s) + A_gamma` is an M-matrix for any `s >= 0, s != 0`.
///
/// The matrix represents the bilinear form, not the strong operator: the
/// discrete counterpart of `-Laplace v` is `M^{-1} A v` with `M` the quadrature
/// weights of the grid.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Arc<Grid>,
    gamma: f64,
    edges: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
}

/// Assembles `A_gamma` on `grid`; `gamma = 0` gives the Neumann operator `A`.
pub fn assemble_operator(grid: Arc<Grid>, gamma: f64) -> Result<DiscreteOperator, GridError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(GridError::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let nx = grid.nodes_along(0);
    let ny = grid.nodes_along(1);
    let mut edges = Vec::new();
    for j in 0..ny {
        let face = grid.dual_width(1, j);
        let c = face / grid.spacing(0);
        for i in 0..nx - 1 {
            edges.push((grid.index(i, j), grid.index(i + 1, j), c));
        }
    }
    if grid.dim() == 2 {
        for j in 0..ny - 1 {
            for i in 0..nx {
                let c = grid.dual_width(0, i) / grid.spacing(1);
                edges.push((grid.index(i, j), grid.index(i, j + 1), c));
            }
        }
    }
    let mut diag: Vec<f64> = grid.boundary_weights().iter().map(|b| gamma * b).collect();
    for &(a, b, c) in &edges {
        diag[a] += c;
        diag[b] += c;
    }
    Ok(DiscreteOperator { grid, gamma, edges, diag })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Nearest-neighbour couplings `(i, j, c)` with `A_ij = -c`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for &(a, b, c) in &self.edges {
            y[a] -= c * x[b];
            y[b] -= c * x[a];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `<A v, w>`.
    pub fn form(&self, v: &[f64], w: &[f64]) -> f64 {
        self.apply(v).iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// `int |grad v|^2`, the edge sum `sum c (v_i - v_j)^2`.
    pub fn gradient_energy(&self, v: &[f64]) -> f64 {
        self.edges.iter().map(|&(a, b, c)| c * (v[a] - v[b]).powi(2)).sum()
    }

    /// `int_Gamma v^2`.
    pub fn boundary_energy(&self, v: &[f64]) -> f64 {
        self.grid.boundary_weights().iter().zip(v).map(|(b, x)| b * x * x).sum()
    }

    /// Banded copy of `diag(shift) + scale * A`.
    pub(crate) fn to_band(&self, shift: &[f64], scale: f64) -> BandMatrix {
        let mut m = BandMatrix::zeros(self.order(), self.grid.bandwidth());
        for (i, (d, s)) in self.diag.iter().zip(shift).enumerate() {
            m.add(i, i, scale * d + s);
        }
        for &(a, b, c) in &self.edges {
            m.add(a, b, -scale * c);
        }
        m
    }

    /// Dense row-major copy, for inspection and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.order();
        let mut m = vec![vec![0.0; n]; n];
        for (i, d) in self.diag.iter().enumerate() {
            m[i][i] = *d;
        }
        for &(a, b, c) in &self.edges {
            m[a][b] -= c;
            m[b][a] -= c;
        }
        m
    }
}

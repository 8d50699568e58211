use std::sync::Arc;

use crate::error::GridError;

/// A structured node-based mesh of a segment or rectangle `(0, L_x) x (0, L_y)`.
///
/// Nodes are numbered lexicographically with `x` fastest:
/// `index(i, j) = i + j * (cells_x + 1)`. In 1D `j` is always 0.
///
/// Quadrature is the trapezoid rule: each node carries the measure of its
/// dual cell, which is half a spacing wide along any axis where the node
/// sits on the boundary. The same weights enter the finite-volume operators,
/// so discrete integrals and operator row sums are consistent.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    lengths: [f64; 2],
    spacing: [f64; 2],
    weights: Vec<f64>,
    boundary_weights: Vec<f64>,
}

impl Grid {
    pub fn new_1d(cells: usize, length: f64) -> Result<Self, GridError> {
        Self::new(&[cells], &[length])
    }

    pub fn new_2d(cells: [usize; 2], lengths: [f64; 2]) -> Result<Self, GridError> {
        Self::new(&cells, &lengths)
    }

    pub fn new(cells: &[usize], lengths: &[f64]) -> Result<Self, GridError> {
        let dim = cells.len();
        if !(1..=2).contains(&dim) {
            return Err(GridError::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if lengths.len() != dim {
            return Err(GridError::InvalidGrid(format!(
                "{} lengths given for a {dim}D grid",
                lengths.len()
            )));
        }
        let mut c = [0usize; 2];
        let mut l = [1.0f64; 2];
        let mut h = [1.0f64; 2];
        for axis in 0..dim {
            if cells[axis] == 0 {
                return Err(GridError::InvalidGrid(format!("axis {axis} has zero cells")));
            }
            if !(lengths[axis].is_finite() && lengths[axis] > 0.0) {
                return Err(GridError::InvalidGrid(format!(
                    "axis {axis} length must be positive, got {}",
                    lengths[axis]
                )));
            }
            c[axis] = cells[axis];
            l[axis] = lengths[axis];
            h[axis] = lengths[axis] / cells[axis] as f64;
        }
        let mut grid = Grid {
            dim,
            cells: c,
            lengths: l,
            spacing: h,
            weights: Vec::new(),
            boundary_weights: Vec::new(),
        };
        grid.weights = (0..grid.node_count()).map(|k| grid.dual_measure(k)).collect();
        grid.boundary_weights =
            (0..grid.node_count()).map(|k| grid.dual_boundary_measure(k)).collect();
        Ok(grid)
    }

    pub fn into_shared(self) -> Arc<Grid> {
        Arc::new(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis]
        } else {
            0
        }
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    /// Nodes along `axis` (1 for an absent axis).
    pub fn nodes_along(&self, axis: usize) -> usize {
        self.cells(axis) + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_along(0) * if self.dim == 2 { self.nodes_along(1) } else { 1 }
    }

    /// `|Omega|`.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.lengths[a]).product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.nodes_along(0)
    }

    #[inline]
    pub fn multi_index(&self, k: usize) -> (usize, usize) {
        let nx = self.nodes_along(0);
        (k % nx, k / nx)
    }

    /// Coordinates of node `k`; the second entry is 0 in 1D.
    pub fn coords(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.multi_index(k);
        let x = i as f64 * self.spacing[0];
        let y = if self.dim == 2 { j as f64 * self.spacing[1] } else { 0.0 };
        [x, y]
    }

    /// Half-bandwidth of any nearest-neighbour operator in the node ordering.
    pub fn bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.nodes_along(0)
        }
    }

    /// Trapezoid weights, summing to `|Omega|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Boundary measure lumped onto nodes (unit point masses at the ends in 1D).
    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weights
    }

    /// Dual-cell width along `axis` at position `i`.
    pub(crate) fn dual_width(&self, axis: usize, i: usize) -> f64 {
        if axis >= self.dim {
            return 1.0;
        }
        if i == 0 || i == self.cells[axis] {
            0.5 * self.spacing[axis]
        } else {
            self.spacing[axis]
        }
    }

    fn dual_measure(&self, k: usize) -> f64 {
        let (i, j) = self.multi_index(k);
        self.dual_width(0, i) * self.dual_width(1, j)
    }

    fn dual_boundary_measure(&self, k: usize) -> f64 {
        let (i, j) = self.multi_index(k);
        let mut b = 0.0;
        if self.dim == 1 {
            if i == 0 || i == self.cells[0] {
                b += 1.0;
            }
            return b;
        }
        if i == 0 || i == self.cells[0] {
            b += self.dual_width(1, j);
        }
        if j == 0 || j == self.cells[1] {
            b += self.dual_width(0, i);
        }
        b
    }
}

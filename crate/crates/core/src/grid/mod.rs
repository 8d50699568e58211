//! Structured meshes, grid functions and the discrete diffusion operators
//! `A` (Neumann) and `A_gamma` (Robin).

mod field;
pub mod linalg;
mod mesh;
mod operator;
mod solve;

pub use field::{integrate, Field};
pub(crate) use field::weighted_dot;
pub use mesh::Grid;
pub use operator::{assemble_operator, DiscreteOperator};
pub use solve::{
    dual_norm, solve_shifted, solve_shifted_with, Shift, SolverKind, DEFAULT_LINEAR_TOL,
};
pub(crate) use solve::solve_raw;

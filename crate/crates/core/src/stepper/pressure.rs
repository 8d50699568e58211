use crate::error::StepperError;
use crate::grid::{solve_raw, DiscreteOperator, Field, Shift, SolverKind};

/// One implicit step of `d_t u + A_gamma p = 0`, `p = u (1 + chi)`.
///
/// Solved for `p` as the symmetric M-matrix system
/// `(M / (dt (1 + chi)) + A_gamma) p = M u_prev / dt`, then `u = p / (1 + chi)`.
/// Column sums of `A_0` vanish, so `sum M u = sum M u_prev` when `gamma = 0`.
pub fn update_pressure(
    op: &DiscreteOperator,
    u_prev: &Field,
    chi: &Field,
    dt: f64,
    tol: f64,
) -> Result<(Field, Field), StepperError> {
    if !(dt > 0.0) {
        return Err(StepperError::InvalidConfig(format!("dt must be > 0, got {dt}")));
    }
    let grid = u_prev.grid();
    let weights = grid.weights();
    let shift: Vec<f64> = weights
        .iter()
        .zip(chi.values())
        .map(|(m, c)| m / (dt * (1.0 + c)))
        .collect();
    let rhs: Vec<f64> = weights.iter().zip(u_prev.values()).map(|(m, u)| m * u / dt).collect();
    let p = solve_raw(op, Shift::Nodal(&shift), &rhs, tol, SolverKind::Direct)?;
    let u: Vec<f64> = p.iter().zip(chi.values()).map(|(p, c)| p / (1.0 + c)).collect();
    if let Some((node, &value)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(StepperError::Positivity { node, value });
    }
    Ok((Field::new(grid.clone(), u)?, Field::new(grid.clone(), p)?))
}

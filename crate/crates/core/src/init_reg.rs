//! Resolvent smoothing of initial data.
//!
//! A datum `v0` is replaced by the solution of `v + (1/n) A v = v0`, which by the
//! discrete maximum principle stays in `[min v0, max v0]` and converges to `v0`
//! as `n` grows. Densities get an extra `1/n` on the right so that they are
//! bounded below by `1/n`.

use std::sync::Arc;

use crate::constitutive::{entropy_density, HSpec};
use crate::error::InitError;
use crate::grid::{assemble_operator, solve_raw, weighted_dot, Field, Shift, SolverKind};
use crate::stepper::State;

/// Default smoothing index for production runs.
pub const DEFAULT_SMOOTHING_INDEX: usize = 100;

const SOLVE_TOL: f64 = 1e-12;

/// How the initial temperature is smoothed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TemperaturePathway {
    /// `theta0 > 0`: smooth `sqrt(theta0)` with the positive variant and square,
    /// giving `theta_0n >= 1/n^2`.
    #[default]
    Positive,
    /// Plain resolvent smoothing of `theta0`.
    General,
}

impl std::str::FromStr for TemperaturePathway {
    type Err = InitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "positive" => Ok(TemperaturePathway::Positive),
            "general" => Ok(TemperaturePathway::General),
            other => Err(InitError::InvalidData(format!("unknown temperature pathway `{other}`"))),
        }
    }
}

fn check_index(n: usize) -> Result<(), InitError> {
    if n == 0 {
        return Err(InitError::InvalidData("smoothing index n must be positive".into()));
    }
    Ok(())
}

/// Solves `v + (1/n) A v = v0` as `(n M + A) v = n M v0`.
pub fn smooth_resolvent(v0: &Field, n: usize) -> Result<Field, InitError> {
    check_index(n)?;
    let grid = v0.grid();
    let op = assemble_operator(grid.clone(), 0.0)?;
    let nf = n as f64;
    let shift: Vec<f64> = grid.weights().iter().map(|m| nf * m).collect();
    let rhs: Vec<f64> = shift.iter().zip(v0.values()).map(|(s, v)| s * v).collect();
    let (lo, hi) = (v0.min(), v0.max());
    let v = solve_raw(&op, Shift::Nodal(&shift), &rhs, SOLVE_TOL, SolverKind::Direct)?;
    // roundoff may leave the maximum principle range by a few ulps
    let v = v.into_iter().map(|x| x.clamp(lo, hi)).collect();
    Ok(Field::new(grid.clone(), v)?)
}

/// Solves `u + (1/n) A u = u0 + 1/n`; the result is at least `1/n` at every node.
pub fn smooth_positive(u0: &Field, n: usize) -> Result<Field, InitError> {
    check_index(n)?;
    if let Some((node, v)) = u0.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(InitError::InvalidData(format!("u0 = {v} is negative at node {node}")));
    }
    let shift = 1.0 / n as f64;
    Ok(smooth_resolvent(u0, n)?.map(|v| v + shift))
}

/// Builds the smoothed initial state at `t = 0`:
/// `chi = R_n chi0`, `u = P_n u0`, `theta` by `pathway`, `e = psi(theta, chi)`,
/// `p = u (1 + chi)`, `xi = log(1 + chi)`.
pub fn build_initial_state(
    theta0: &Field,
    chi0: &Field,
    u0: &Field,
    n: usize,
    spec: &HSpec,
    pathway: TemperaturePathway,
) -> Result<State, InitError> {
    spec.validate()?;
    if !(theta0.same_grid(chi0) && theta0.same_grid(u0)) {
        return Err(InitError::InvalidData("initial profiles live on different grids".into()));
    }
    if let Some((node, v)) = chi0.values().iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(InitError::InvalidData(format!("chi0 = {v} outside [0, 1] at node {node}")));
    }
    let theta = match pathway {
        TemperaturePathway::Positive => {
            if let Some((node, v)) = theta0.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(InitError::InvalidData(format!(
                    "positive pathway needs theta0 > 0, got {v} at node {node}"
                )));
            }
            smooth_positive(&theta0.map(f64::sqrt), n)?.map(|eta| eta * eta)
        }
        TemperaturePathway::General => smooth_resolvent(theta0, n)?,
    };
    let chi = smooth_resolvent(chi0, n)?;
    let u = smooth_positive(u0, n)?;
    let e = theta.zip_map(&chi, |t, c| spec.psi_unchecked(t, c));
    let p = u.zip_map(&chi, |u, c| u * (1.0 + c));
    let xi = chi.map(f64::ln_1p);
    Ok(State { t: 0.0, e, theta, chi, xi, u, p })
}

/// `int (u - log u)`, the entropy-like functional bounded by the smoothing.
pub fn entropy_integral(u: &Field) -> Result<f64, InitError> {
    if let Some((node, v)) = u.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(InitError::InvalidData(format!("u = {v} is not positive at node {node}")));
    }
    Ok(u.map(entropy_density).integrate())
}

/// `|v|_W^2 / n` with `|v|_W^2 = |v|^2 + <A v, v> + |M^{-1} A v|^2`.
///
/// Bounded in `n` for resolvent-smoothed data; monitored, not enforced.
pub fn regularity_ratio(v: &Field, n: usize) -> Result<f64, InitError> {
    check_index(n)?;
    let grid: &Arc<_> = v.grid();
    let op = assemble_operator(grid.clone(), 0.0)?;
    let m = grid.weights();
    let av = op.apply(v.values());
    let strong: Vec<f64> = av.iter().zip(m).map(|(a, w)| a / w).collect();
    let norm = weighted_dot(m, v.values(), v.values())
        + weighted_dot(&vec![1.0; m.len()], &av, v.values())
        + weighted_dot(m, &strong, &strong);
    Ok(norm / n as f64)
}

use std::sync::Arc;

use crate::constitutive::{beta_residual, HSpec};
use crate::error::StateError;
use crate::grid::{Field, Grid};

/// The sextuple `(e, theta, chi, xi, u, p)` at time `t`.
///
/// Fields are public; [`validate_state`] checks the coupled relations
/// `e = psi(theta, chi)`, `p = u (1 + chi)`, `0 <= chi <= 1`, `u > 0` and `xi in beta(chi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    /// Internal energy.
    pub e: Field,
    /// Temperature.
    pub theta: Field,
    /// Phase fraction.
    pub chi: Field,
    /// Selection of `beta(chi)`.
    pub xi: Field,
    /// Hydrogen density.
    pub u: Field,
    /// Pressure.
    pub p: Field,
}

impl State {
    pub fn grid(&self) -> &Arc<Grid> {
        self.theta.grid()
    }

    /// The fields in snapshot column order.
    pub fn fields(&self) -> [(&'static str, &Field); 6] {
        [
            ("e", &self.e),
            ("theta", &self.theta),
            ("chi", &self.chi),
            ("xi", &self.xi),
            ("u", &self.u),
            ("p", &self.p),
        ]
    }

    /// `omega = xi - log(1 + chi)`, the normal-cone part of `xi`.
    pub fn multiplier(&self) -> Field {
        self.xi.zip_map(&self.chi, |xi, chi| xi - chi.ln_1p())
    }
}

/// Checks every coupled relation of `state` with absolute tolerance `tol`
/// (relative to the magnitude of the field for the two equalities).
pub fn validate_state(state: &State, spec: &HSpec, tol: f64) -> Result<(), StateError> {
    for (_, f) in state.fields() {
        if !f.same_grid(&state.theta) {
            return Err(StateError::GridMismatch);
        }
    }
    for (name, f) in state.fields() {
        if let Some(node) = f.values().iter().position(|v| !v.is_finite()) {
            return Err(StateError::NonFinite { field: name, node });
        }
    }
    if !state.t.is_finite() {
        return Err(StateError::NonFinite { field: "t", node: 0 });
    }
    let chi = state.chi.values();
    for (node, &value) in chi.iter().enumerate() {
        if !(-tol..=1.0 + tol).contains(&value) {
            return Err(StateError::PhaseRange { node, value });
        }
    }
    for (node, &value) in state.u.values().iter().enumerate() {
        if !(value > 0.0) {
            return Err(StateError::NonPositiveDensity { node, value });
        }
    }
    let theta = state.theta.values();
    for (node, (&e, (&th, &c))) in state.e.values().iter().zip(theta.iter().zip(chi)).enumerate() {
        let deviation = (e - spec.psi_unchecked(th, c.clamp(0.0, 1.0))).abs();
        if deviation > tol * (1.0 + e.abs()) {
            return Err(StateError::EnergyRelation { node, deviation });
        }
    }
    let u = state.u.values();
    for (node, (&p, (&u, &c))) in state.p.values().iter().zip(u.iter().zip(chi)).enumerate() {
        let deviation = (p - u * (1.0 + c)).abs();
        if deviation > tol * (1.0 + p.abs()) {
            return Err(StateError::PressureRelation { node, deviation });
        }
    }
    for (node, (&c, &xi)) in chi.iter().zip(state.xi.values()).enumerate() {
        let violation = beta_residual(c.clamp(0.0, 1.0), xi);
        if violation > tol {
            return Err(StateError::BetaInclusion { node, violation });
        }
    }
    Ok(())
}

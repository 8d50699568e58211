use crate::constitutive::HSpec;
use crate::error::StepperError;

/// Physical constants of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Viscosity of the phase relaxation, `> 0`.
    pub mu: f64,
    /// Boundary permeability of the pressure flux, `>= 0`.
    pub gamma: f64,
    pub h: HSpec,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { mu: 1.0, gamma: 0.0, h: HSpec::default() }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), StepperError> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(StepperError::InvalidConfig(format!("mu > 0 required, got {}", self.mu)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(StepperError::InvalidConfig(format!(
                "gamma >= 0 required, got {}",
                self.gamma
            )));
        }
        self.h.validate()?;
        Ok(())
    }
}

/// Numerical controls of the time integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    /// Initial time step.
    pub dt: f64,
    /// Smallest step tried before giving up.
    pub dt_min: f64,
    /// Max-norm change of `(chi, theta)` across a coupling sweep that ends the loop.
    pub tol_couple: f64,
    /// Residual tolerance of the phase and energy Newton solves.
    pub tol_newton: f64,
    /// Relative residual tolerance of linear solves.
    pub tol_linear: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    /// Coefficient of the `-nu Laplace d_t chi` regularization.
    pub nu: f64,
    /// Under-relaxation of the coupling inputs, in `(0, 1]`.
    pub relaxation: f64,
    /// `min u` below this raises the floor flag of the step report.
    pub u_floor: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: 1e-3,
            dt_min: 1e-8,
            tol_couple: 1e-11,
            tol_newton: 1e-11,
            tol_linear: 1e-12,
            max_outer: 50,
            max_newton: 50,
            nu: 1e-3,
            relaxation: 1.0,
            u_floor: 1e-12,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), StepperError> {
        let fail = |m: String| Err(StepperError::InvalidConfig(m));
        if !(self.dt_min.is_finite() && self.dt_min > 0.0) {
            return fail(format!("dt_min > 0 required, got {}", self.dt_min));
        }
        if !(self.dt.is_finite() && self.dt >= self.dt_min) {
            return fail(format!("dt >= dt_min required, got dt = {}, dt_min = {}", self.dt, self.dt_min));
        }
        for (name, v) in [
            ("tol_couple", self.tol_couple),
            ("tol_newton", self.tol_newton),
            ("tol_linear", self.tol_linear),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} > 0 required, got {v}"));
            }
        }
        if self.max_outer == 0 || self.max_newton == 0 {
            return fail("iteration budgets must be positive".into());
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return fail(format!("nu >= 0 required, got {}", self.nu));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return fail(format!("relaxation in (0, 1] required, got {}", self.relaxation));
        }
        if !(self.u_floor.is_finite() && self.u_floor >= 0.0) {
            return fail(format!("u_floor >= 0 required, got {}", self.u_floor));
        }
        Ok(())
    }
}

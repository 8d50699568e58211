//! Implicit Euler integration of the coupled energy, phase and pressure equations.
//!
//! Each step runs a Gauss-Seidel sweep `pressure -> phase -> energy` until the
//! max-norm change of `(chi, theta)` drops below `tol_couple`, then closes with a
//! pressure solve for the final phase so that the returned state satisfies the
//! discrete continuity equation exactly. Recoverable subsolve failures halve the
//! time step down to `dt_min`; a reduced step is kept for the rest of the run.

mod config;
mod energy;
mod phase;
mod pressure;
mod state;

use std::sync::Arc;

pub use config::{ModelParams, StepperConfig};
pub use energy::{update_energy, EnergyUpdate};
pub use phase::{update_phase, NewtonReport, PhaseUpdate};
pub use pressure::update_pressure;
pub use state::{validate_state, State};

use crate::error::{RunError, StepperError};
use crate::grid::{assemble_operator, DiscreteOperator, Field, Grid};

/// Tolerance of [`validate_state`] applied to states entering and leaving a step.
pub const STATE_TOL: f64 = 1e-9;

/// Summary of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub outer_iterations: usize,
    /// Last change of the coupling sweep.
    pub coupling_change: f64,
    pub phase: NewtonReport,
    pub energy: NewtonReport,
    /// Newton iterations summed over all sweeps.
    pub phase_iterations: usize,
    pub energy_iterations: usize,
    /// The step was retried with a smaller `dt`.
    pub dt_reduced: bool,
    /// `min u` fell below `u_floor`.
    pub floor_engaged: bool,
    pub min_u: f64,
}

/// Output of [`Stepper::run`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// States at the requested output times, excluding the initial state.
    pub outputs: Vec<State>,
    pub reports: Vec<StepReport>,
    pub final_state: State,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.reports.len()
    }
}

/// Time integrator bound to one grid and parameter set.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: ModelParams,
    cfg: StepperConfig,
    neumann: DiscreteOperator,
    robin: DiscreteOperator,
    dt: f64,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>, params: ModelParams, cfg: StepperConfig) -> Result<Self, StepperError> {
        params.validate()?;
        cfg.validate()?;
        let neumann = assemble_operator(grid.clone(), 0.0)?;
        let robin = assemble_operator(grid, params.gamma)?;
        Ok(Stepper { params, cfg, neumann, robin, dt: cfg.dt })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.neumann.grid()
    }

    /// The Neumann operator `A`.
    pub fn neumann(&self) -> &DiscreteOperator {
        &self.neumann
    }

    /// The pressure operator `A_gamma`.
    pub fn robin(&self) -> &DiscreteOperator {
        &self.robin
    }

    /// Current step size; only ever decreases.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn update_pressure(&self, u_prev: &Field, chi: &Field, dt: f64) -> Result<(Field, Field), StepperError> {
        update_pressure(&self.robin, u_prev, chi, dt, self.cfg.tol_linear)
    }

    pub fn update_phase(
        &self,
        chi_prev: &Field,
        theta: &Field,
        u: &Field,
        dt: f64,
    ) -> Result<PhaseUpdate, StepperError> {
        update_phase(&self.neumann, chi_prev, theta, u, dt, &self.params, &self.cfg)
    }

    pub fn update_energy(
        &self,
        e_prev: &Field,
        chi_prev: &Field,
        chi: &Field,
        theta_guess: &Field,
        dt: f64,
    ) -> Result<EnergyUpdate, StepperError> {
        update_energy(&self.neumann, e_prev, chi_prev, chi, theta_guess, dt, &self.params, &self.cfg)
    }

    /// One step of size exactly `dt`, without retries.
    pub fn step_with_dt(&self, state: &State, dt: f64) -> Result<(State, StepReport), StepperError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(StepperError::InvalidConfig(format!("dt must be > 0, got {dt}")));
        }
        if state.grid().as_ref() != self.grid().as_ref() {
            return Err(StepperError::InvalidState(crate::error::StateError::GridMismatch));
        }
        validate_state(state, &self.params.h, STATE_TOL)?;
        let cfg = &self.cfg;
        let relax = cfg.relaxation;
        let mut chi_in = state.chi.clone();
        let mut theta_in = state.theta.clone();
        let mut report = StepReport {
            dt,
            outer_iterations: 0,
            coupling_change: f64::INFINITY,
            phase: NewtonReport::default(),
            energy: NewtonReport::default(),
            phase_iterations: 0,
            energy_iterations: 0,
            dt_reduced: false,
            floor_engaged: false,
            min_u: 0.0,
        };
        for sweep in 1..=cfg.max_outer {
            let (u, _) = self.update_pressure(&state.u, &chi_in, dt)?;
            let phase = phase::update_phase_from(
                &self.neumann,
                &state.chi,
                &theta_in,
                &u,
                dt,
                &self.params,
                cfg,
                chi_in.values(),
            )?;
            let energy = self.update_energy(&state.e, &state.chi, &phase.chi, &theta_in, dt)?;
            let change = phase.chi.max_abs_diff(&chi_in).max(energy.theta.max_abs_diff(&theta_in));
            report.outer_iterations = sweep;
            report.coupling_change = change;
            report.phase = phase.report;
            report.energy = energy.report;
            report.phase_iterations += phase.report.iterations;
            report.energy_iterations += energy.report.iterations;
            if change <= cfg.tol_couple {
                let (u, p) = self.update_pressure(&state.u, &phase.chi, dt)?;
                report.min_u = u.min();
                report.floor_engaged = report.min_u < cfg.u_floor;
                let next = State {
                    t: state.t + dt,
                    e: energy.e,
                    theta: energy.theta,
                    chi: phase.chi,
                    xi: phase.xi,
                    u,
                    p,
                };
                validate_state(&next, &self.params.h, STATE_TOL)?;
                return Ok((next, report));
            }
            if relax < 1.0 {
                chi_in = chi_in.zip_map(&phase.chi, |old, new| old + relax * (new - old));
                theta_in = theta_in.zip_map(&energy.theta, |old, new| old + relax * (new - old));
            } else {
                chi_in = phase.chi;
                theta_in = energy.theta;
            }
        }
        Err(StepperError::CouplingNotConverged {
            iterations: report.outer_iterations,
            change: report.coupling_change,
        })
    }

    /// One step of the current size, halving on recoverable failure.
    pub fn step(&mut self, state: &State) -> Result<(State, StepReport), StepperError> {
        self.step_capped(state, f64::INFINITY)
    }

    /// Like [`Stepper::step`] but never beyond `max_dt`; a cap does not change the stored step size.
    pub fn step_capped(&mut self, state: &State, max_dt: f64) -> Result<(State, StepReport), StepperError> {
        let mut reduced = false;
        loop {
            let dt = self.dt.min(max_dt);
            match self.step_with_dt(state, dt) {
                Ok((next, mut report)) => {
                    report.dt_reduced = reduced;
                    return Ok((next, report));
                }
                Err(err) if err.is_recoverable() => {
                    let half = 0.5 * self.dt.min(max_dt);
                    if half < self.cfg.dt_min {
                        return Err(StepperError::DtUnderflow {
                            t: state.t,
                            dt_min: self.cfg.dt_min,
                            last: Box::new(err),
                        });
                    }
                    self.dt = half;
                    reduced = true;
                }
                Err(err) => return Err(err),
            }
        }
    }

    /// Integrates from `initial` to `t_end`, calling `hook(prev, next, report)` after every step.
    ///
    /// With `output_interval = Some(d)` the trajectory keeps the states at `t0 + k d`;
    /// the final state is always available.
    pub fn run(
        &mut self,
        initial: &State,
        t_end: f64,
        output_interval: Option<f64>,
        hook: &mut dyn FnMut(&State, &State, &StepReport),
    ) -> Result<Trajectory, RunError> {
        let fail = |step: usize, state: &State, source: StepperError| RunError {
            step,
            state: Box::new(state.clone()),
            source,
        };
        let t0 = initial.t;
        if !(t_end >= t0) {
            return Err(fail(0, initial, StepperError::BadHorizon { t0, t_end }));
        }
        if let Some(d) = output_interval {
            if !(d.is_finite() && d > 0.0) {
                return Err(fail(
                    0,
                    initial,
                    StepperError::InvalidConfig(format!("output interval must be > 0, got {d}")),
                ));
            }
        }
        let mut outputs = Vec::new();
        let mut reports = Vec::new();
        let mut state = initial.clone();
        let mut next_output = 1usize;
        while t_end - state.t > 1e-9 * self.dt {
            let remaining = t_end - state.t;
            let last = remaining <= self.dt;
            let step = reports.len() + 1;
            let (mut next, report) = self
                .step_capped(&state, remaining)
                .map_err(|e| fail(step, &state, e))?;
            if (last && report.dt >= remaining) || (t_end - next.t).abs() <= 1e-9 * report.dt {
                next.t = t_end;
            }
            hook(&state, &next, &report);
            if let Some(d) = output_interval {
                let tol = 1e-6 * report.dt;
                while next.t + tol >= t0 + next_output as f64 * d {
                    if next.t + tol < t0 + (next_output + 1) as f64 * d {
                        outputs.push(next.clone());
                    }
                    next_output += 1;
                }
            }
            reports.push(report);
            state = next;
        }
        Ok(Trajectory { outputs, reports, final_state: state })
    }
}

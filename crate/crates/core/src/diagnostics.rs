//! Scalar monitors of a trajectory and oracles for the long-time theory.
//!
//! With `gamma > 0` the lift `zeta` solving `A_gamma zeta = u` gives the Lyapunov
//! functional `Phi1 = <A_gamma zeta, zeta> / 2`, and `Phi2` accumulates
//! `int (1 + chi) u^2 = <u, p>` over time. The implicit pressure step satisfies
//! `Phi1(k+1) - Phi1(k) + dt <u, p> = -|zeta(k+1) - zeta(k)|_A^2 / 2 <= 0`,
//! which is recorded as `dissip_res`.

use std::sync::Arc;

use crate::constitutive::{beta_residual, entropy_density, hatbeta_inner, HSpec};
use crate::error::DiagnosticsError;
use crate::grid::{assemble_operator, dual_norm, weighted_dot, DiscreteOperator, Field, Grid};
use crate::stepper::{ModelParams, State};

/// Half-width of the band around `h(theta) = log p` classified as [`SteadyBranch::ChiFree`].
pub const STEADY_DEAD_BAND: f64 = 1e-9;

// Backward-error check on the direct lift solve; conditioning grows like cells^2.
const LIFT_TOL: f64 = 1e-9;

/// Per-step scalar monitors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `int u`.
    pub mass: f64,
    /// `int e`.
    pub energy: f64,
    /// `J = int hatbeta(chi)`.
    pub j: f64,
    /// `Phi1`; `None` when `gamma = 0` or the lift failed.
    pub phi1: Option<f64>,
    /// Running `Phi2`; `None` when `gamma = 0`.
    pub phi2: Option<f64>,
    /// `dt <u, p>` of this step.
    pub phi2_increment: Option<f64>,
    pub min_chi: f64,
    pub max_chi: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    /// `int (u - log u)`.
    pub entropy_u: f64,
    /// `int |log theta|`, only when `min theta > 0`.
    pub log_theta_l1: Option<f64>,
    /// `int e - int e_prev - dt int (-h(theta) d_t chi + mu (d_t chi)^2)`; zero without a previous state.
    pub energy_res: f64,
    /// `Phi1(k+1) - Phi1(k) + dt <u, p>`; should be `<= 0`.
    pub dissip_res: Option<f64>,
    pub outer_iters: usize,
}

/// `int e` balance of one step against its two sources.
pub fn energy_residual(state: &State, prev: &State, params: &ModelParams) -> f64 {
    let dt = state.t - prev.t;
    let m = state.grid().weights();
    let spec = &params.h;
    let source: f64 = (0..m.len())
        .map(|i| {
            let rate = (state.chi.values()[i] - prev.chi.values()[i]) / dt;
            m[i] * (-spec.h(state.theta.values()[i]) * rate + params.mu * rate * rate)
        })
        .sum();
    state.e.integrate() - prev.e.integrate() - dt * source
}

/// `Phi1` of `u` computed from both sides of `A_gamma zeta = u`:
/// `(<u, zeta> / 2, (|grad zeta|^2 + gamma int_Gamma zeta^2) / 2)`.
pub fn phi1_two_ways(u: &Field, op: &DiscreteOperator) -> Result<(f64, f64), DiagnosticsError> {
    let (norm, zeta) = dual_norm(u, op, LIFT_TOL)?;
    let z = zeta.values();
    let energy = op.gradient_energy(z) + op.gamma() * op.boundary_energy(z);
    Ok((0.5 * norm * norm, 0.5 * energy))
}

/// Builds records along a trajectory, carrying `Phi1` and the running `Phi2`.
#[derive(Clone, Debug)]
pub struct Monitor {
    params: ModelParams,
    robin: Option<DiscreteOperator>,
    phi2: f64,
    last_phi1: Option<f64>,
}

impl Monitor {
    pub fn new(grid: Arc<Grid>, params: ModelParams) -> Result<Self, DiagnosticsError> {
        let robin = if params.gamma > 0.0 { Some(assemble_operator(grid, params.gamma)?) } else { None };
        Ok(Monitor { params, robin, phi2: 0.0, last_phi1: None })
    }

    /// Records `state`; `prev` is the state one step earlier (`None` for the initial state).
    pub fn observe(&mut self, state: &State, prev: Option<&State>, outer_iters: usize) -> DiagnosticsRecord {
        let mut rec = base_record(state, prev, &self.params, outer_iters);
        if let Some(op) = &self.robin {
            let phi1 = dual_norm(&state.u, op, LIFT_TOL).ok().map(|(v, _)| 0.5 * v * v);
            if let Some(prev) = prev {
                let inc = (state.t - prev.t) * state.u.inner(&state.p);
                self.phi2 += inc;
                rec.phi2_increment = Some(inc);
                if let (Some(now), Some(before)) = (phi1, self.last_phi1) {
                    rec.dissip_res = Some(now - before + inc);
                }
            }
            rec.phi1 = phi1;
            rec.phi2 = Some(self.phi2);
            self.last_phi1 = phi1;
        }
        rec
    }
}

/// Stand-alone record; recomputes `Phi1` of `prev` when needed.
pub fn record(state: &State, prev: Option<&State>, params: &ModelParams) -> DiagnosticsRecord {
    let mut monitor = match Monitor::new(state.grid().clone(), *params) {
        Ok(m) => m,
        Err(_) => return base_record(state, prev, params, 0),
    };
    if let Some(p) = prev {
        monitor.observe(p, None, 0);
    }
    monitor.observe(state, prev, 0)
}

fn base_record(state: &State, prev: Option<&State>, params: &ModelParams, outer_iters: usize) -> DiagnosticsRecord {
    let min_theta = state.theta.min();
    DiagnosticsRecord {
        t: state.t,
        mass: state.u.integrate(),
        energy: state.e.integrate(),
        j: state.chi.map(|c| hatbeta_inner(c.clamp(0.0, 1.0))).integrate(),
        phi1: None,
        phi2: None,
        phi2_increment: None,
        min_chi: state.chi.min(),
        max_chi: state.chi.max(),
        min_u: state.u.min(),
        max_u: state.u.max(),
        min_theta,
        max_theta: state.theta.max(),
        entropy_u: state.u.map(entropy_density).integrate(),
        log_theta_l1: (min_theta > 0.0).then(|| state.theta.map(|t| t.ln().abs()).integrate()),
        energy_res: prev.map_or(0.0, |p| energy_residual(state, p, params)),
        dissip_res: None,
        outer_iters,
    }
}

/// Exponential fit `phi1 ~ C exp(-alpha t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub alpha: f64,
    /// Coefficient of determination of the log-linear fit; 1 for an exactly flat series.
    pub r_squared: f64,
}

/// Least-squares slope of `log phi1` against `t`; needs at least 10 positive samples.
pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<DecayFit, DiagnosticsError> {
    const NEEDED: usize = 10;
    if series.len() < NEEDED {
        return Err(DiagnosticsError::TooFewSamples { needed: NEEDED, got: series.len() });
    }
    if let Some(&(t, value)) = series.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(DiagnosticsError::Degenerate { t, value });
    }
    let n = series.len() as f64;
    let t_mean = series.iter().map(|s| s.0).sum::<f64>() / n;
    let y_mean = series.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in series {
        let (dx, dy) = (t - t_mean, v.ln() - y_mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(DiagnosticsError::Degenerate { t: series[0].0, value: series[0].1 });
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    Ok(DecayFit { alpha: -slope, r_squared })
}

/// Constant equilibria of the isolated system, by the sign of `h(theta) - log p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyBranch {
    /// Positive: `chi = 1`, `p = 2 u`.
    ChiOne,
    /// Zero: any constant `chi` in `[0, 1]`.
    ChiFree,
    /// Negative: `chi = 0`, `p = u`.
    ChiZero,
}

pub fn classify_steady(theta: f64, p: f64, spec: &HSpec, dead_band: f64) -> Result<SteadyBranch, DiagnosticsError> {
    if !(p > 0.0) {
        return Err(DiagnosticsError::NonPositivePressure(p));
    }
    let drive = spec.h(theta) - p.ln();
    Ok(if drive > dead_band {
        SteadyBranch::ChiOne
    } else if drive < -dead_band {
        SteadyBranch::ChiZero
    } else {
        SteadyBranch::ChiFree
    })
}

/// The constant steady state with temperature `theta` and pressure `p`;
/// `chi_free` is used only on the [`SteadyBranch::ChiFree`] branch.
pub fn steady_state(
    grid: Arc<Grid>,
    theta: f64,
    p: f64,
    chi_free: f64,
    spec: &HSpec,
) -> Result<State, DiagnosticsError> {
    let branch = classify_steady(theta, p, spec, STEADY_DEAD_BAND)?;
    let drive = spec.h(theta) - p.ln();
    let (chi, omega) = match branch {
        SteadyBranch::ChiOne => (1.0, drive),
        SteadyBranch::ChiZero => (0.0, drive),
        SteadyBranch::ChiFree => {
            if !(0.0..=1.0).contains(&chi_free) {
                return Err(crate::error::ConstitutiveError::ChiOutOfRange(chi_free).into());
            }
            (chi_free, 0.0)
        }
    };
    let c = |v| Field::constant(grid.clone(), v);
    Ok(State {
        t: 0.0,
        e: c(spec.psi_unchecked(theta, chi)),
        theta: c(theta),
        chi: c(chi),
        xi: c(omega + f64::ln_1p(chi)),
        u: c(p / (1.0 + chi)),
        p: c(p),
    })
}

/// Stationary residual in the mass-weighted `L^2` norm:
/// `|M^-1 A theta| + |M^-1 A_gamma p| + |M^-1 A chi + omega - h(theta) + log p| + |dist(xi, beta(chi))|`.
pub fn steady_residual(state: &State, params: &ModelParams) -> Result<f64, DiagnosticsError> {
    let grid = state.grid();
    let m = grid.weights();
    let neumann = assemble_operator(grid.clone(), 0.0)?;
    let robin = assemble_operator(grid.clone(), params.gamma)?;
    let norm = |v: &[f64]| weighted_dot(m, v, v).sqrt();
    let strong = |op: &DiscreteOperator, v: &[f64]| -> Vec<f64> {
        op.apply(v).iter().zip(m).map(|(a, w)| a / w).collect()
    };
    let r_theta = norm(&strong(&neumann, state.theta.values()));
    let r_p = norm(&strong(&robin, state.p.values()));
    let a_chi = strong(&neumann, state.chi.values());
    let phase: Vec<f64> = (0..m.len())
        .map(|i| {
            let chi = state.chi.values()[i];
            let omega = state.xi.values()[i] - chi.ln_1p();
            a_chi[i] + omega - params.h.h(state.theta.values()[i]) + state.p.values()[i].ln()
        })
        .collect();
    let cone: Vec<f64> = state
        .chi
        .values()
        .iter()
        .zip(state.xi.values())
        .map(|(&c, &x)| beta_residual(c, x))
        .collect();
    Ok(r_theta + r_p + norm(&phase) + norm(&cone))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::new_1d(8, 2.0).unwrap())
    }

    #[test]
    fn decay_fit_examples() {
        let exact: Vec<_> = (0..20).map(|k| (k as f64 * 0.1, (-2.0 * k as f64 * 0.1).exp())).collect();
        let fit = fit_decay_rate(&exact).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<_> = (0..12).map(|k| (k as f64, 3.0)).collect();
        let fit = fit_decay_rate(&flat).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert!(fit_decay_rate(&exact[..5]).is_err());
        let mut bad = exact.clone();
        bad[4].1 = 0.0;
        assert!(matches!(fit_decay_rate(&bad), Err(DiagnosticsError::Degenerate { .. })));
    }

    #[test]
    fn trichotomy_examples() {
        let spec = HSpec::default();
        let p0 = spec.h(1.0).exp();
        let b = STEADY_DEAD_BAND;
        assert_eq!(classify_steady(1.0, p0, &spec, b).unwrap(), SteadyBranch::ChiFree);
        assert_eq!(classify_steady(1.0, p0 / 2.0, &spec, b).unwrap(), SteadyBranch::ChiOne);
        assert_eq!(classify_steady(1.0, 2.0 * p0, &spec, b).unwrap(), SteadyBranch::ChiZero);
        assert!(classify_steady(1.0, 0.0, &spec, b).is_err());
    }

    #[test]
    fn steady_states_have_zero_residual() {
        let params = ModelParams::default();
        let spec = params.h;
        let p0 = spec.h(1.0).exp();
        for (p, chi) in [(p0, 0.3), (p0 / 2.0, 1.0), (2.0 * p0, 0.0)] {
            let s = steady_state(grid(), 1.0, p, 0.3, &spec).unwrap();
            assert_eq!(s.chi.values()[0], chi);
            assert!(steady_residual(&s, &params).unwrap() < 1e-12);
            crate::stepper::validate_state(&s, &spec, 1e-14).unwrap();
        }
    }

    #[test]
    fn interior_mismatch_is_measured() {
        let params = ModelParams::default();
        let spec = params.h;
        let mut s = steady_state(grid(), 1.0, spec.h(1.0).exp(), 0.5, &spec).unwrap();
        let p = (spec.h(1.0) - 1.0).exp();
        s.p = Field::constant(grid(), p);
        s.u = Field::constant(grid(), p / 1.5);
        let r = steady_residual(&s, &params).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn record_of_uniform_states() {
        let params = ModelParams::default();
        let s = steady_state(grid(), 1.0, 2.0, 0.0, &params.h).unwrap();
        assert_eq!(s.chi.values()[0], 1.0);
        let rec = record(&s, Some(&s), &params);
        assert!((rec.j - 2.0 * (2.0 * LN_2 - 1.0)).abs() < 1e-14);
        assert_eq!(rec.min_chi, 1.0);
        assert!(rec.phi1.is_none());
        let mut s1 = steady_state(grid(), 1.0, 2.0, 0.0, &params.h).unwrap();
        s1.u = Field::constant(grid(), 1.0);
        s1.p = Field::constant(grid(), 2.0);
        let rec = record(&s1, None, &params);
        assert!((rec.entropy_u - 2.0).abs() < 1e-14);
        assert_eq!(rec.energy_res, 0.0);
    }

    #[test]
    fn phi1_agrees_both_ways() {
        let g = grid();
        let op = assemble_operator(g.clone(), 1.5).unwrap();
        let u = Field::from_fn(g, |x| 1.0 + x[0].sin()).unwrap();
        let (a, b) = phi1_two_ways(&u, &op).unwrap();
        assert!((a - b).abs() <= 1e-8 * a);
    }
}

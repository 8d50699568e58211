use crate::error::StepperError;
use crate::grid::{DiscreteOperator, Field};

use super::phase::NewtonReport;
use super::{ModelParams, StepperConfig};

const MAX_BACKTRACKS: usize = 30;

/// Result of [`update_energy`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyUpdate {
    pub e: Field,
    pub theta: Field,
    pub report: NewtonReport,
}

/// One implicit step of `d_t e + A theta = -h(theta) d_t chi + mu (d_t chi)^2`, `e = psi(theta, chi)`.
///
/// Newton in `theta` with Jacobian `M diag(psi_theta + dt h'(theta) d_t chi) + dt A` and
/// backtracking on the mass-weighted residual. Converged when the nodal residual
/// `|R_i / M_i|` is at most `tol_newton (1 + max |e_prev|)`. The returned `e` is
/// `psi(theta, chi)` evaluated exactly.
#[allow(clippy::too_many_arguments)]
pub fn update_energy(
    op: &DiscreteOperator,
    e_prev: &Field,
    chi_prev: &Field,
    chi: &Field,
    theta_guess: &Field,
    dt: f64,
    params: &ModelParams,
    cfg: &StepperConfig,
) -> Result<EnergyUpdate, StepperError> {
    let grid = e_prev.grid();
    let m = grid.weights();
    let n = m.len();
    let spec = &params.h;
    let chi_v = chi.values();
    let e_p = e_prev.values();
    let rate: Vec<f64> =
        chi_v.iter().zip(chi_prev.values()).map(|(c, cp)| (c - cp) / dt).collect();
    let tol = cfg.tol_newton * (1.0 + e_p.iter().fold(0.0f64, |s, v| s.max(v.abs())));

    let residual = |th: &[f64], out: &mut [f64]| {
        op.apply_into(th, out);
        for i in 0..n {
            let source = -spec.h(th[i]) * rate[i] + params.mu * rate[i] * rate[i];
            out[i] = dt * out[i] + m[i] * (spec.psi_unchecked(th[i], chi_v[i]) - e_p[i] - dt * source);
        }
    };
    let merit = |r: &[f64]| -> f64 { r.iter().zip(m).map(|(r, m)| r * r / m).sum::<f64>() };
    let nodal = |r: &[f64]| -> f64 { r.iter().zip(m).fold(0.0f64, |s, (r, m)| s.max((r / m).abs())) };

    let mut theta = theta_guess.values().to_vec();
    let mut r = vec![0.0; n];
    residual(&theta, &mut r);
    let mut report = NewtonReport::default();
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; n];
    loop {
        report.residual = nodal(&r);
        if !report.residual.is_finite() {
            break;
        }
        if report.residual <= tol {
            let e: Vec<f64> =
                theta.iter().zip(chi_v).map(|(&t, &c)| spec.psi_unchecked(t, c)).collect();
            return Ok(EnergyUpdate {
                e: Field::new(grid.clone(), e)?,
                theta: Field::new(grid.clone(), theta)?,
                report,
            });
        }
        if report.iterations == cfg.max_newton {
            break;
        }
        report.iterations += 1;
        let shift: Vec<f64> = (0..n)
            .map(|i| {
                m[i] * (spec.psi_theta_unchecked(theta[i], chi_v[i])
                    + spec.h_prime(theta[i]) * rate[i] * dt)
            })
            .collect();
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = op.to_band(&shift, dt).factor()?.solve(&neg_r);
        let phi0 = merit(&r);
        let mut step = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..n {
                trial[i] = theta[i] + step * delta[i];
            }
            residual(&trial, &mut r_trial);
            if merit(&r_trial) <= (1.0 - 1e-4 * step) * phi0 {
                break;
            }
            step *= 0.5;
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut r, &mut r_trial);
    }
    Err(StepperError::EnergyNotConverged { iterations: report.iterations, residual: report.residual })
}

use crate::error::StepperError;
use crate::grid::{DiscreteOperator, Field};

use super::{ModelParams, StepperConfig};

/// Convergence record of a Newton-type subsolve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Terminal residual in the subsolve's own norm.
    pub residual: f64,
    /// Largest distance by which an iterate was moved back into `[0, 1]`.
    pub snapped: f64,
    pub active_lower: usize,
    pub active_upper: usize,
}

/// Result of [`update_phase`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseUpdate {
    pub chi: Field,
    pub xi: Field,
    pub report: NewtonReport,
}

/// `log(1 + x)` on `[0, 1]`, continued linearly with matching slope outside.
#[inline]
fn smooth_part(x: f64) -> f64 {
    if x < 0.0 {
        x
    } else if x > 1.0 {
        std::f64::consts::LN_2 + 0.5 * (x - 1.0)
    } else {
        x.ln_1p()
    }
}

#[inline]
fn smooth_part_slope(x: f64) -> f64 {
    1.0 / (1.0 + x.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// One implicit step of the constrained phase equation
///
/// ```text
/// mu (chi - chi_prev)/dt + (nu/dt) A (chi - chi_prev) + A chi + omega + log(1 + chi) = h(theta) - log u,
/// omega in N_[0,1](chi),
/// ```
///
/// solved by a primal-dual active set (semismooth Newton) iteration on
/// `chi - proj_[0,1](chi + c omega) = 0` with `c` the inverse Jacobian diagonal.
/// Returns `xi = omega + log(1 + chi)`.
pub fn update_phase(
    op: &DiscreteOperator,
    chi_prev: &Field,
    theta: &Field,
    u: &Field,
    dt: f64,
    params: &ModelParams,
    cfg: &StepperConfig,
) -> Result<PhaseUpdate, StepperError> {
    update_phase_from(op, chi_prev, theta, u, dt, params, cfg, chi_prev.values())
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn update_phase_from(
    op: &DiscreteOperator,
    chi_prev: &Field,
    theta: &Field,
    u: &Field,
    dt: f64,
    params: &ModelParams,
    cfg: &StepperConfig,
    guess: &[f64],
) -> Result<PhaseUpdate, StepperError> {
    let grid = chi_prev.grid();
    let m = grid.weights();
    let n = m.len();
    if let Some((node, &value)) = u.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(StepperError::Positivity { node, value });
    }
    let a = params.mu / dt;
    let b = cfg.nu / dt;
    let g: Vec<f64> = theta
        .values()
        .iter()
        .zip(u.values())
        .map(|(&th, &u)| params.h.h(th) - u.ln())
        .collect();
    let chi_p = chi_prev.values();
    let k_prev = op.apply(chi_p);
    let k_diag = op.diagonal();

    // F(x) = a M (x - x_p) + (1 + b) K x - b K x_p + M l(x) - M g
    let residual = |x: &[f64], out: &mut [f64]| {
        op.apply_into(x, out);
        for i in 0..n {
            out[i] = (1.0 + b) * out[i] - b * k_prev[i]
                + m[i] * (a * (x[i] - chi_p[i]) + smooth_part(x[i]) - g[i]);
        }
    };

    let mut chi: Vec<f64> = guess.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut f = vec![0.0; n];
    let mut bounds = vec![Bound::Free; n];
    let mut report = NewtonReport::default();
    let mut converged = false;
    for it in 0..=cfg.max_newton {
        residual(&chi, &mut f);
        let mut res: f64 = 0.0;
        for i in 0..n {
            let jd = (1.0 + b) * k_diag[i] + m[i] * (a + smooth_part_slope(chi[i]));
            let trial = chi[i] - f[i] / jd;
            bounds[i] = if trial > 1.0 {
                Bound::Upper
            } else if trial < 0.0 {
                Bound::Lower
            } else {
                Bound::Free
            };
            res = res.max((chi[i] - trial.clamp(0.0, 1.0)).abs());
        }
        if !res.is_finite() {
            break;
        }
        report.iterations = it;
        report.residual = res;
        if res <= cfg.tol_newton {
            converged = true;
            break;
        }
        if it == cfg.max_newton {
            break;
        }
        let shift: Vec<f64> =
            (0..n).map(|i| m[i] * (a + smooth_part_slope(chi[i]))).collect();
        let mut jac = op.to_band(&shift, 1.0 + b);
        let jump: Vec<f64> = (0..n)
            .map(|i| match bounds[i] {
                Bound::Free => 0.0,
                Bound::Lower => -chi[i],
                Bound::Upper => 1.0 - chi[i],
            })
            .collect();
        let mut rhs = vec![0.0; n];
        jac.apply(&jump, &mut rhs);
        for i in 0..n {
            rhs[i] = -f[i] - rhs[i];
        }
        for i in 0..n {
            if bounds[i] != Bound::Free {
                jac.pin(i);
                rhs[i] = 0.0;
            }
        }
        let delta = jac.factor()?.solve(&rhs);
        for i in 0..n {
            chi[i] = match bounds[i] {
                Bound::Free => chi[i] + delta[i],
                Bound::Lower => 0.0,
                Bound::Upper => 1.0,
            };
        }
    }
    if !converged {
        return Err(StepperError::PhaseNotConverged {
            iterations: report.iterations,
            residual: report.residual,
        });
    }

    for (x, bound) in chi.iter_mut().zip(&bounds) {
        let clamped = x.clamp(0.0, 1.0);
        report.snapped = report.snapped.max((*x - clamped).abs());
        *x = match bound {
            Bound::Lower => 0.0,
            Bound::Upper => 1.0,
            Bound::Free => clamped,
        };
    }
    residual(&chi, &mut f);
    let xi: Vec<f64> = (0..n)
        .map(|i| {
            let omega = match bounds[i] {
                Bound::Free => 0.0,
                Bound::Lower => (-f[i] / m[i]).min(0.0),
                Bound::Upper => (-f[i] / m[i]).max(0.0),
            };
            omega + chi[i].ln_1p()
        })
        .collect();
    report.active_lower = bounds.iter().filter(|b| **b == Bound::Lower).count();
    report.active_upper = bounds.iter().filter(|b| **b == Bound::Upper).count();
    Ok(PhaseUpdate {
        chi: Field::new(grid.clone(), chi)?,
        xi: Field::new(grid.clone(), xi)?,
        report,
    })
}

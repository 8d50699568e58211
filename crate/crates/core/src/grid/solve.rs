use super::linalg::{norm2, pcg};
use super::{DiscreteOperator, Field};
use crate::error::GridError;

/// Default relative residual tolerance for elliptic solves.
pub const DEFAULT_LINEAR_TOL: f64 = 1e-10;

/// Diagonal shift added to an operator before solving.
#[derive(Clone, Copy, Debug)]
pub enum Shift<'a> {
    Scalar(f64),
    Nodal(&'a [f64]),
}

impl Shift<'_> {
    fn expand(&self, n: usize) -> Result<Vec<f64>, GridError> {
        let s = match *self {
            Shift::Scalar(v) => vec![v; n],
            Shift::Nodal(v) => {
                if v.len() != n {
                    return Err(GridError::LengthMismatch { expected: n, got: v.len() });
                }
                v.to_vec()
            }
        };
        if let Some((node, &value)) =
            s.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(GridError::InvalidArgument(format!(
                "shift must be finite and >= 0, got {value} at node {node}"
            )));
        }
        Ok(s)
    }
}

/// Linear solver behind [`solve_shifted`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    /// Banded Cholesky factorization.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

/// Solves `(diag(shift) + A) v = rhs` with the default direct solver.
pub fn solve_shifted(
    op: &DiscreteOperator,
    shift: Shift<'_>,
    rhs: &Field,
    tol: f64,
) -> Result<Field, GridError> {
    solve_shifted_with(op, shift, rhs, tol, SolverKind::Direct)
}

/// Solves `(diag(shift) + A) v = rhs` and checks `|rhs - (shift + A) v| <= tol |rhs|`.
pub fn solve_shifted_with(
    op: &DiscreteOperator,
    shift: Shift<'_>,
    rhs: &Field,
    tol: f64,
    kind: SolverKind,
) -> Result<Field, GridError> {
    if rhs.grid().as_ref() != op.grid().as_ref() {
        return Err(GridError::GridMismatch);
    }
    let values = solve_raw(op, shift, rhs.values(), tol, kind)?;
    Ok(Field::from_vec(rhs.grid().clone(), values))
}

pub(crate) fn solve_raw(
    op: &DiscreteOperator,
    shift: Shift<'_>,
    rhs: &[f64],
    tol: f64,
    kind: SolverKind,
) -> Result<Vec<f64>, GridError> {
    if !(tol > 0.0) {
        return Err(GridError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let n = op.order();
    if rhs.len() != n {
        return Err(GridError::LengthMismatch { expected: n, got: rhs.len() });
    }
    let shift = shift.expand(n)?;
    if op.gamma() == 0.0 && shift.iter().all(|&s| s == 0.0) {
        return Err(GridError::Singular(
            "Neumann operator without shift has constants in its kernel".into(),
        ));
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        op.apply_into(x, y);
        for ((yi, s), xi) in y.iter_mut().zip(&shift).zip(x) {
            *yi += s * xi;
        }
    };
    let v = match kind {
        SolverKind::Direct => op.to_band(&shift, 1.0).factor()?.solve(rhs),
        SolverKind::ConjugateGradient => {
            let diag: Vec<f64> = op.diagonal().iter().zip(&shift).map(|(d, s)| d + s).collect();
            pcg(apply, &diag, rhs, tol, 10 * n + 100)?.0
        }
    };
    let mut r = vec![0.0; n];
    apply(&v, &mut r);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let b_norm = norm2(rhs);
    let res = norm2(&r);
    if res > tol * b_norm {
        return Err(GridError::NotConverged {
            iterations: 1,
            residual: if b_norm > 0.0 { res / b_norm } else { res },
        });
    }
    if let Some((node, &value)) = v.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(GridError::NonFinite { node, value });
    }
    Ok(v)
}

/// Dual norm of `u` induced by `A_gamma`: solves `A_gamma zeta = u` weakly and returns
/// `(sqrt(<u, zeta>), zeta)`. `<u, zeta> = <A_gamma zeta, zeta>` is twice the
/// Lyapunov functional of the pressure equation.
pub fn dual_norm(u: &Field, op: &DiscreteOperator, tol: f64) -> Result<(f64, Field), GridError> {
    if !(op.gamma() > 0.0) {
        return Err(GridError::InvalidArgument(
            "dual norm needs gamma > 0; A_0 has constants in its kernel".into(),
        ));
    }
    if u.grid().as_ref() != op.grid().as_ref() {
        return Err(GridError::GridMismatch);
    }
    let weights = u.grid().weights();
    let rhs: Vec<f64> = u.values().iter().zip(weights).map(|(v, w)| v * w).collect();
    let zeta = if rhs.iter().all(|&v| v == 0.0) {
        vec![0.0; rhs.len()]
    } else {
        solve_raw(op, Shift::Scalar(0.0), &rhs, tol, SolverKind::Direct)?
    };
    let pairing: f64 = rhs.iter().zip(&zeta).map(|(a, b)| a * b).sum();
    Ok((pairing.max(0.0).sqrt(), Field::from_vec(u.grid().clone(), zeta)))
}

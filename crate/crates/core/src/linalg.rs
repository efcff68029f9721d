use nalgebra::{DMatrix, DVector};

use crate::error::{MkcError, Result};

const PIVOT_TOL: f64 = 1e-13;

/// Solves `a x = b` for symmetric `a`.
///
/// Cholesky first; when the matrix is not positive definite (e.g. negative
/// sample weights from unconstrained mixture coefficients) falls back to
/// partially pivoted LU. `regularized` only shapes the error message.
pub(crate) fn solve_symmetric(a: DMatrix<f64>, b: &DVector<f64>, regularized: bool) -> Result<DVector<f64>> {
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(chol) = a.clone().cholesky() {
        let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if min_pivot * min_pivot > PIVOT_TOL * scale.max(f64::MIN_POSITIVE) {
            let x = chol.solve(b);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
    }
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(min_pivot > PIVOT_TOL * scale.max(f64::MIN_POSITIVE)) {
        return Err(MkcError::Singular {
            suggest_regularization: !regularized,
        });
    }
    match lu.solve(b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(MkcError::Singular {
            suggest_regularization: !regularized,
        }),
    }
}

//! Central finite-difference checks of analytic derivatives.

use serde::Serialize;

use super::{check_dim, first_violation, ProblemOracle};
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::{Matrix, Vector};

/// Largest absolute entrywise discrepancies between analytic derivatives and
/// central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub max_grad_err: f64,
    pub max_jac_err: f64,
    /// Worst over `hess_f` and every `hess_a(., i)`.
    pub max_hess_err: f64,
    pub pass: bool,
}

/// Central-difference step `eps^(1/3) * (1 + |x|_inf)`.
pub fn fd_step(x: &Vector) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + norm_inf(x))
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient(fun: impl Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    let mut g = Vector::zeros(x.len());
    let mut xp = x.clone();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = fun(&xp);
        xp[j] = x[j] - h;
        let fm = fun(&xp);
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of a vector function; column `j` is the
/// derivative along `e_j`.
pub fn central_jacobian(fun: impl Fn(&Vector) -> Vector, x: &Vector, h: f64) -> Matrix {
    let mut xp = x.clone();
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = fun(&xp);
        xp[j] = x[j] - h;
        let fm = fun(&xp);
        xp[j] = x[j];
        cols.push((fp - fm) / (2.0 * h));
    }
    if cols.is_empty() {
        return Matrix::zeros(fun(x).len(), 0);
    }
    Matrix::from_columns(&cols)
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}

/// Compares `grad_f`, `jac_a`, `hess_f` and every `hess_a` at `x` against
/// central differences of the next-lower derivative.
pub fn check_derivatives(p: &dyn ProblemOracle, x: &Vector, tol: f64) -> Result<DerivativeReport> {
    check_dim(p, x)?;
    if let Some((index, value)) = first_violation(&p.a(x)) {
        return Err(Error::BoundaryViolation { index, value });
    }
    let h = fd_step(x);

    let g_fd = central_gradient(|z| p.f(z), x, h);
    let max_grad_err = (p.grad_f(x) - g_fd).amax();

    let j_fd = central_jacobian(|z| p.a(z), x, h);
    let max_jac_err = max_abs_diff(&p.jac_a(x), &j_fd);

    let hf_fd = central_jacobian(|z| p.grad_f(z), x, h);
    let mut max_hess_err = max_abs_diff(&p.hess_f(x), &hf_fd);
    for i in 0..p.m() {
        let ha_fd = central_jacobian(|z| p.jac_a(z).row(i).transpose(), x, h);
        max_hess_err = max_hess_err.max(max_abs_diff(&p.hess_a(x, i), &ha_fd));
    }

    let pass = max_grad_err <= tol && max_jac_err <= tol && max_hess_err <= tol;
    Ok(DerivativeReport {
        max_grad_err,
        max_jac_err,
        max_hess_err,
        pass,
    })
}

//! Log barrier `psi_mu(x) = f(x) - mu * sum_i log a_i(x)`, its derivatives,
//! the local quadratic model and the termination residuals.

mod residuals;

pub use residuals::{
    fj_residuals, inf_residuals, kkt_residuals, Certificate, CertificateKind, FjResiduals,
    Residual, ResidualFailure, Sense, INF_NORM1_TOL,
};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;
use crate::problem::{check_dim, first_violation, ProblemOracle};
use crate::{Matrix, Vector};

/// Barrier value and derivatives at one strictly feasible point.
#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub x: Vector,
    pub mu: f64,
    pub value: f64,
    pub grad: Vector,
    pub hess: Matrix,
    /// `s = a(x) > 0`.
    pub slack: Vector,
    /// `y = mu / s`.
    pub dual: Vector,
    pub jac: Matrix,
    pub grad_f: Vector,
    /// `hess f - sum_i y_i hess a_i` at `y = dual`.
    pub hess_lag: Matrix,
}

impl BarrierEval {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.slack.len()
    }
}

/// Evaluates the barrier and its first two derivatives at `x`.
///
/// Fails with [`Error::BoundaryViolation`] when some `a_i(x) <= 0`.
pub fn barrier_eval(p: &dyn ProblemOracle, mu: f64, x: &Vector) -> Result<BarrierEval> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be finite and > 0, got {mu}"
        )));
    }
    check_dim(p, x)?;
    let slack = p.a(x);
    if let Some((index, value)) = first_violation(&slack) {
        return Err(Error::BoundaryViolation { index, value });
    }
    let dual = slack.map(|s| mu / s);
    let jac = p.jac_a(x);
    let grad_f = p.grad_f(x);

    let value = p.f(x) - mu * slack.iter().map(|s| s.ln()).sum::<f64>();
    let grad = &grad_f - jac.tr_mul(&dual);

    let mut hess_lag = p.hess_f(x);
    for i in 0..p.m() {
        hess_lag -= p.hess_a(x, i) * dual[i];
    }
    let hess_lag = symmetrize(&hess_lag);
    // mu J' S^-2 J
    let mut scaled = jac.clone();
    for i in 0..p.m() {
        scaled.row_mut(i).scale_mut(mu / (slack[i] * slack[i]));
    }
    let hess = symmetrize(&(&hess_lag + jac.tr_mul(&scaled)));

    if !value.is_finite() || grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("barrier evaluation"));
    }
    Ok(BarrierEval {
        x: x.clone(),
        mu,
        value,
        grad,
        hess,
        slack,
        dual,
        jac,
        grad_f,
        hess_lag,
    })
}

/// Barrier value only; `None` when `x` is not strictly feasible.
pub fn barrier_value(p: &dyn ProblemOracle, mu: f64, x: &Vector) -> Option<f64> {
    let slack = p.a(x);
    if first_violation(&slack).is_some() {
        return None;
    }
    Some(p.f(x) - mu * slack.iter().map(|s| s.ln()).sum::<f64>())
}

/// Quadratic model `M(u) = 0.5 u' hess u + grad' u`.
pub fn model_value(be: &BarrierEval, u: &Vector) -> f64 {
    quadratic(&be.hess, &be.grad, u)
}

pub(crate) fn quadratic(h: &Matrix, g: &Vector, u: &Vector) -> f64 {
    0.5 * u.dot(&(h * u)) + g.dot(u)
}

/// Gradient of the Lagrangian, `grad f(x) - J(x)' y`.
pub fn lagrangian_grad(p: &dyn ProblemOracle, x: &Vector, y: &Vector) -> Vector {
    p.grad_f(x) - p.jac_a(x).tr_mul(y)
}

//! Evaluable nonlinear programs.
//!
//! A [`ProblemOracle`] exposes `f`, `a` and their first and second derivatives
//! as dense vectors and matrices, plus user-supplied Lipschitz constants that
//! parameterize the step-size and radius rules of the solvers.

mod builtin;
mod check;

pub use builtin::{
    builtin_problem, Annulus, BoxQp, CircleLp, Infeasible1d, Lp1d, ProblemParams, BUILTIN_NAMES,
};
pub use check::{central_gradient, central_jacobian, check_derivatives, fd_step, DerivativeReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Lipschitz constants `L0`, `L1`, `L2` of the problem functions and of
/// their first and second derivatives.
///
/// All three must be strictly positive: the trust-region radius divides by
/// `L1`. Linear problems still need some `L1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
}

impl LipschitzConstants {
    pub fn new(l0: f64, l1: f64, l2: f64) -> Result<Self> {
        for (name, v) in [("L0", l0), ("L1", l1), ("L2", l2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "Lipschitz constant {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Self { l0, l1, l2 })
    }
}

/// A twice differentiable program `min f(x) s.t. a(x) >= 0`.
///
/// Evaluators must be deterministic and side-effect free. They are only
/// required to be meaningful on the strictly feasible set, but the built-in
/// problems are total on `R^n`. Row `i` of [`jac_a`](Self::jac_a) is the
/// gradient of `a_i`.
pub trait ProblemOracle: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn f(&self, x: &Vector) -> f64;
    fn grad_f(&self, x: &Vector) -> Vector;
    fn hess_f(&self, x: &Vector) -> Matrix;
    fn a(&self, x: &Vector) -> Vector;
    fn jac_a(&self, x: &Vector) -> Matrix;
    /// Hessian of the `i`-th constraint.
    fn hess_a(&self, x: &Vector, i: usize) -> Matrix;
    fn lipschitz(&self) -> LipschitzConstants;
}

/// Returns the first index with `a_i(x) <= 0` (or non-finite).
pub(crate) fn first_violation(slack: &Vector) -> Option<(usize, f64)> {
    slack
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0))
        .map(|(i, v)| (i, *v))
}

pub(crate) fn check_dim(p: &dyn ProblemOracle, x: &Vector) -> Result<()> {
    if x.len() != p.n() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {} but the problem has n = {}",
            x.len(),
            p.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("x"));
    }
    Ok(())
}

//! Adaptive trust-region log-barrier interior point methods for
//! constrained nonlinear optimization.
//!
//! The problems handled here have the form
//!
//! ```text
//! minimize f(x)  subject to  a(x) >= 0
//! ```
//!
//! with `f: R^n -> R` and `a: R^n -> R^m` twice differentiable. Every solver
//! works on the log barrier `psi_mu(x) = f(x) - mu * sum_i log a_i(x)` from a
//! strictly feasible point and keeps all iterates strictly feasible.
//!
//! Module map:
//!
//! * [`problem`]: the [`ProblemOracle`] interface, built-in test problems and a
//!   finite-difference derivative checker.
//! * [`barrier`]: barrier evaluation, the quadratic model and the termination
//!   residuals (approximate Fritz John, unscaled KKT, infinity-norm
//!   infeasibility).
//! * [`trust_region`]: exact solver for `min_{|u| <= r} 0.5 u'Hu + g'u`.
//! * [`ipm`]: the fixed-mu trust-region interior point method.
//! * [`gd`]: fixed-step and adaptive-step gradient descent on the barrier.
//! * [`annealing`]: the decreasing-mu outer loop for convex problems.
//! * [`two_phase`]: phase-one/phase-two driver returning a KKT point or an
//!   infeasibility certificate.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealing;
pub mod barrier;
mod error;
pub mod gd;
pub mod ipm;
pub mod linalg;
pub mod problem;
pub mod trust_region;
pub mod two_phase;

pub use annealing::{annealed_ipm, AnnealConfig, AnnealReport};
pub use barrier::{
    barrier_eval, fj_residuals, inf_residuals, kkt_residuals, model_value, BarrierEval,
    Certificate, CertificateKind, FjResiduals, Residual, ResidualFailure,
};
pub use error::{Error, Result};
pub use gd::{adaptive_gd, fixed_step_gd, GdOutcome, GdTrace};
pub use ipm::{trust_ipm, IpmOutcome, IpmParams, IpmReport, IterateRecord, Mode};
pub use problem::{builtin_problem, check_derivatives, LipschitzConstants, ProblemOracle};
pub use trust_region::{solve_trust_region, TrustRegionSolution};
pub use two_phase::{two_phase_ipm, TwoPhaseConfig, TwoPhaseReport};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

//! Gradient descent on the log barrier: a fixed-step baseline and the
//! adaptive step `alpha = min(min_i a_i / (2 L0 |dx|), 1 / l1(x))`.

use serde::{Deserialize, Serialize};

use crate::barrier::barrier_eval;
use crate::error::{Error, Result};
use crate::linalg::{min_entry, norm1};
use crate::problem::{check_dim, first_violation, ProblemOracle};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GdOutcome {
    Converged,
    IterationLimit,
    /// The step from iterate `k` left the strictly feasible set.
    LeftFeasibleRegion {
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub psi: f64,
    pub grad_norm: f64,
    /// Step taken from this iterate (0 on the final, converged row).
    pub alpha: f64,
    pub ell1: f64,
    pub min_slack: f64,
    pub y_norm1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdTrace {
    pub rows: Vec<GdRecord>,
    pub outcome: GdOutcome,
    /// Last strictly feasible iterate.
    pub x: Vec<f64>,
    /// `mu / a(x)` at that iterate.
    pub y: Vec<f64>,
}

impl GdTrace {
    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.rows.iter().filter(|r| r.alpha > 0.0).count()
    }
}

/// Local Lipschitz constant of the barrier gradient:
/// `L1 (1 + 2 |y|_1) + 4 L0^2 |y|_2^2 / mu`.
pub fn local_lipschitz(l0: f64, l1: f64, mu: f64, y: &Vector) -> f64 {
    l1 * (1.0 + 2.0 * norm1(y)) + 4.0 * l0 * l0 * y.norm_squared() / mu
}

/// `4 (psi0 - psi*) (2 L0^2 tau^-2 mu^-3 + L0 tau^-1 mu^-2 + L1 tau^-2 mu^-2)`.
pub fn gd_iteration_bound(psi0: f64, psi_star: f64, mu: f64, tau_l: f64, l0: f64, l1: f64) -> f64 {
    let gap = psi0 - psi_star;
    4.0 * gap
        * (2.0 * l0 * l0 / (tau_l * tau_l * mu.powi(3))
            + l0 / (tau_l * mu * mu)
            + l1 / (tau_l * tau_l * mu * mu))
}

/// Guaranteed decrease of one adaptive step taken while unterminated:
/// the minimum of `tau mu^2 / (4 L0)`, `tau^2 mu^2 / (4 L1)` (dropped when
/// `L1 = 0`) and `tau^2 mu^3 / (8 L0^2)`.
pub fn adaptive_step_decrease(mu: f64, tau_l: f64, l0: f64, l1: f64) -> f64 {
    let mut d = (tau_l * mu * mu / (4.0 * l0)).min(tau_l * tau_l * mu.powi(3) / (8.0 * l0 * l0));
    if l1 > 0.0 {
        d = d.min(tau_l * tau_l * mu * mu / (4.0 * l1));
    }
    d
}

/// Stopping test shared by both methods: `|grad psi| <= tau mu (1 + |y|_1)`.
pub fn gd_stop(grad_norm: f64, tau_l: f64, mu: f64, y: &Vector) -> bool {
    grad_norm <= tau_l * mu * (1.0 + norm1(y))
}

fn check_start(p: &dyn ProblemOracle, mu: f64, x0: &Vector) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be finite and > 0, got {mu}"
        )));
    }
    check_dim(p, x0)?;
    if let Some((index, value)) = first_violation(&p.a(x0)) {
        return Err(Error::BoundaryViolation { index, value });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    p: &dyn ProblemOracle,
    mu: f64,
    tau_l: f64,
    x0: &Vector,
    max_iters: usize,
    l0: f64,
    l1: f64,
    step: &dyn Fn(&crate::barrier::BarrierEval, f64) -> f64,
) -> Result<GdTrace> {
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut k = 0;
    loop {
        let be = barrier_eval(p, mu, &x)?;
        let grad_norm = be.grad.norm();
        let ell1 = local_lipschitz(l0, l1, mu, &be.dual);
        let mut row = GdRecord {
            k,
            x: x.as_slice().to_vec(),
            psi: be.value,
            grad_norm,
            alpha: 0.0,
            ell1,
            min_slack: min_entry(&be.slack),
            y_norm1: norm1(&be.dual),
        };
        let finish = |rows: Vec<GdRecord>, outcome| GdTrace {
            rows,
            outcome,
            x: x.as_slice().to_vec(),
            y: be.dual.as_slice().to_vec(),
        };
        if gd_stop(grad_norm, tau_l, mu, &be.dual) {
            rows.push(row);
            return Ok(finish(rows, GdOutcome::Converged));
        }
        if k == max_iters {
            rows.push(row);
            return Ok(finish(rows, GdOutcome::IterationLimit));
        }
        let alpha = step(&be, ell1);
        row.alpha = alpha;
        rows.push(row);
        let next = &x - &be.grad * alpha;
        if first_violation(&p.a(&next)).is_some() || next.iter().any(|v| !v.is_finite()) {
            return Ok(finish(rows, GdOutcome::LeftFeasibleRegion { k }));
        }
        x = next;
        k += 1;
    }
}

/// `x <- x - alpha grad psi(x)` until the stopping test, `max_iters` steps,
/// or the first infeasible iterate.
pub fn fixed_step_gd(
    p: &dyn ProblemOracle,
    mu: f64,
    alpha: f64,
    tau_l: f64,
    x0: &Vector,
    max_iters: usize,
) -> Result<GdTrace> {
    check_start(p, mu, x0)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    let lip = p.lipschitz();
    run(p, mu, tau_l, x0, max_iters, lip.l0, lip.l1, &|_, _| alpha)
}

/// Adaptive-step gradient descent with explicit Lipschitz inputs; `l1 = 0`
/// is allowed and drops the curvature term of the local constant.
pub fn adaptive_gd(
    p: &dyn ProblemOracle,
    mu: f64,
    tau_l: f64,
    l0: f64,
    l1: f64,
    x0: &Vector,
    max_iters: usize,
) -> Result<GdTrace> {
    check_start(p, mu, x0)?;
    if !(l0 > 0.0 && l1 >= 0.0 && tau_l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need L0 > 0, L1 >= 0, tau_l > 0; got {l0}, {l1}, {tau_l}"
        )));
    }
    run(p, mu, tau_l, x0, max_iters, l0, l1, &|be, ell1| {
        let dx = be.grad.norm();
        (min_entry(&be.slack) / (2.0 * l0 * dx)).min(1.0 / ell1)
    })
}

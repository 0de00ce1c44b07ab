//! Fixed-mu trust-region interior point method.
//!
//! Each iteration sets `y = mu S^-1 1`, solves the trust-region subproblem on
//! the barrier's quadratic model with radius
//! `r = eta_x sqrt(mu / (L1 (1 + |y|_1)))`, moves the primal and dual
//! variables by a step capped so that the relative slack change is at most
//! `eta_s`, and stops when the candidate pair passes the approximate
//! Fritz John test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barrier::{barrier_eval, fj_residuals, BarrierEval, Certificate, FjResiduals};
use crate::error::{Error, Result};
use crate::linalg::norm1;
use crate::problem::{check_dim, first_violation, ProblemOracle};
use crate::trust_region::{solve_trust_region, TrustRegionSolution, DEFAULT_TOL};
use crate::{Matrix, Vector};

/// Cap on the default iteration budget.
pub const MAX_ITERS_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Terminate on first- and second-order conditions.
    Nonconvex,
    /// Terminate on first-order conditions only (f convex, a concave).
    Convex,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nonconvex" => Ok(Self::Nonconvex),
            "convex" => Ok(Self::Convex),
            other => Err(Error::InvalidArgument(format!(
                "mode must be `nonconvex` or `convex`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Nonconvex => "nonconvex",
            Self::Convex => "convex",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpmParams {
    pub mu: f64,
    pub tau_l: f64,
    /// Complementarity tolerance, in `(0, 1]`.
    pub tau_c: f64,
    pub eta_s: f64,
    pub eta_x: f64,
    pub mode: Mode,
    pub max_iters: usize,
}

impl IpmParams {
    /// Step parameters from [`eta_params`] and `tau_c` from
    /// [`validate_small_mu`], clamped to 1. Returns the warnings produced.
    pub fn from_theory(
        mu: f64,
        tau_l: f64,
        l1: f64,
        l2: f64,
        mode: Mode,
        max_iters: usize,
    ) -> (Self, Vec<String>) {
        let (eta_s, eta_x) = eta_params(mu, tau_l, l1, mode);
        let (tau_c, mut warnings) = validate_small_mu(mu, tau_l, l1, l2, mode);
        let tau_c = if tau_c > 1.0 {
            warnings.push(format!("tau_c clamped from {tau_c} to 1"));
            1.0
        } else {
            tau_c
        };
        let params = Self {
            mu,
            tau_l,
            tau_c,
            eta_s,
            eta_x,
            mode,
            max_iters,
        };
        (params, warnings)
    }

    pub fn validate(&self) -> Result<()> {
        let bad =
            |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} out of range: {v}")));
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", self.mu);
        }
        if !(self.tau_l > 0.0 && self.tau_l.is_finite()) {
            return bad("tau_l", self.tau_l);
        }
        if !(self.tau_c > 0.0 && self.tau_c <= 1.0) {
            return bad("tau_c", self.tau_c);
        }
        if !(self.eta_s > 0.0 && self.eta_s < 1.0) {
            return bad("eta_s", self.eta_s);
        }
        if !(self.eta_x > 0.0 && self.eta_x < 1.0) {
            return bad("eta_x", self.eta_x);
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// `eta_x * sqrt(mu / (L1 (1 + |y|_1)))`.
pub fn trust_radius(mu: f64, l1: f64, y: &Vector, eta_x: f64) -> f64 {
    eta_x * (mu / (l1 * (1.0 + norm1(y)))).sqrt()
}

/// `(eta_s, eta_x)` for the given mode.
///
/// Nonconvex: `eta_s = (tau_l^2 mu / L1)^(1/4) / 40`, `eta_x = eta_s / 2`.
/// Convex: `eta_x = (tau_l^2 mu / L1)^(1/6) / 20`,
/// `eta_s = (tau_l^2 mu / L1)^(1/3) / 20`.
pub fn eta_params(mu: f64, tau_l: f64, l1: f64, mode: Mode) -> (f64, f64) {
    let ratio = tau_l * tau_l * mu / l1;
    match mode {
        Mode::Nonconvex => {
            let eta_s = ratio.powf(0.25) / 40.0;
            (eta_s, eta_s / 2.0)
        }
        Mode::Convex => (ratio.cbrt() / 20.0, ratio.powf(1.0 / 6.0) / 20.0),
    }
}

/// Returns the mode's `tau_c` and a warning for each small-mu condition that
/// fails: `tau_c <= 1` and, for nonconvex, `L2^2 mu / L1^3 <= 1`, for convex,
/// `L2^3 mu / (L1^4 tau_l) <= 1`.
pub fn validate_small_mu(mu: f64, tau_l: f64, l1: f64, l2: f64, mode: Mode) -> (f64, Vec<String>) {
    let ratio = tau_l * tau_l * mu / l1;
    let (tau_c, curv_name, curv) = match mode {
        Mode::Nonconvex => (ratio.sqrt(), "L2^2 mu / L1^3", l2 * l2 * mu / l1.powi(3)),
        Mode::Convex => (
            ratio.cbrt(),
            "L2^3 mu / (L1^4 tau_l)",
            l2.powi(3) * mu / (l1.powi(4) * tau_l),
        ),
    };
    let mut warnings = Vec::new();
    if !(tau_c > 0.0 && tau_c <= 1.0) {
        warnings.push(format!("tau_c = {tau_c} is not in (0, 1]"));
    }
    if !(curv > 0.0 && curv <= 1.0) {
        warnings.push(format!("{curv_name} = {curv} is not in (0, 1]"));
    }
    (tau_c, warnings)
}

/// Guaranteed barrier decrease over two consecutive non-terminating
/// nonconvex iterations: `(7 mu / 48000) (tau_l^2 mu / L1)^(3/4)`.
pub fn pair_decrease(mu: f64, tau_l: f64, l1: f64) -> f64 {
    7.0 * mu / 48000.0 * (tau_l * tau_l * mu / l1).powf(0.75)
}

/// `2 + 2 (psi0 - psi_star) / pair_decrease(mu, tau_l, L1)`.
pub fn nonconvex_iteration_bound(psi0: f64, psi_star: f64, mu: f64, tau_l: f64, l1: f64) -> f64 {
    2.0 + 2.0 * (psi0 - psi_star) / pair_decrease(mu, tau_l, l1)
}

/// `min(10 * bound, 10^6)`, at least 1.
pub fn default_max_iters(bound: f64) -> usize {
    let scaled = (10.0 * bound).ceil();
    if scaled.is_finite() && scaled < MAX_ITERS_CAP as f64 {
        (scaled as usize).max(1)
    } else {
        MAX_ITERS_CAP
    }
}

/// One trust-region direction in the primal, slack and dual spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dx: Vector,
    /// `J(x) dx`.
    pub ds: Vector,
    /// `-mu S^-2 ds`.
    pub dy: Vector,
    pub delta: f64,
    pub model_at_dx: f64,
    pub r: f64,
    pub hard_case: bool,
}

/// Direction at `x` for radius `r`.
pub fn compute_direction(p: &dyn ProblemOracle, mu: f64, x: &Vector, r: f64) -> Result<Direction> {
    let be = barrier_eval(p, mu, x)?;
    direction_at(&be, r)
}

/// Direction from an existing barrier evaluation.
pub fn direction_at(be: &BarrierEval, r: f64) -> Result<Direction> {
    let TrustRegionSolution {
        u: dx,
        delta,
        model_value,
        hard_case,
        ..
    } = solve_trust_region(&be.hess, &be.grad, r, DEFAULT_TOL)?;
    let ds = &be.jac * &dx;
    let dy = Vector::from_iterator(
        ds.len(),
        ds.iter()
            .zip(be.slack.iter())
            .map(|(d, s)| -be.mu * d / (s * s)),
    );
    Ok(Direction {
        dx,
        ds,
        dy,
        delta,
        model_at_dx: model_value,
        r,
        hard_case,
    })
}

/// `|S^-1 ds|_2`.
pub fn slack_ratio(slack: &Vector, ds: &Vector) -> f64 {
    ds.component_div(slack).norm()
}

/// `min(eta_s / |S^-1 ds|, 1)`, or 1 when `ds = 0`.
pub fn step_size(slack: &Vector, ds: &Vector, eta_s: f64) -> f64 {
    let ratio = slack_ratio(slack, ds);
    if ratio == 0.0 {
        1.0
    } else {
        (eta_s / ratio).min(1.0)
    }
}

/// Residuals of the perturbed Newton system satisfied by a direction:
/// `(H_L + delta I) dx - J'dy + grad_x L`, `J dx - ds` and
/// `S dy + Y ds - (mu 1 - S y)`, each as a 2-norm.
pub fn newton_residuals(be: &BarrierEval, dir: &Direction) -> [f64; 3] {
    let n = be.n();
    let lag = &be.grad_f - be.jac.tr_mul(&be.dual);
    let first = (&be.hess_lag + Matrix::identity(n, n) * dir.delta) * &dir.dx
        - be.jac.tr_mul(&dir.dy)
        + lag;
    let second = &be.jac * &dir.dx - &dir.ds;
    let third = be.slack.component_mul(&dir.dy) + be.dual.component_mul(&dir.ds)
        - (Vector::from_element(be.m(), be.mu) - be.slack.component_mul(&be.dual));
    [first.norm(), second.norm(), third.norm()]
}

/// Upper bound on `|S^-1 ds|` valid when all second derivatives are bounded
/// by `L1`: `sqrt((L1 (1 + |y|_1) |dx|^2 - 2 M(dx)) / mu)`.
pub fn nonconvex_slack_bound(be: &BarrierEval, dir: &Direction, l1: f64) -> f64 {
    let num = l1 * (1.0 + norm1(&be.dual)) * dir.dx.norm_squared() - 2.0 * dir.model_at_dx;
    (num.max(0.0) / be.mu).sqrt()
}

/// Upper bound on `|S^-1 ds|` valid for convex problems: `sqrt(-2 M(dx) / mu)`.
pub fn convex_slack_bound(be: &BarrierEval, dir: &Direction) -> f64 {
    ((-2.0 * dir.model_at_dx).max(0.0) / be.mu).sqrt()
}

/// `alpha |S^-1 ds| + L1 |alpha dx|^2 |y|_2 / mu`; when at most 1/4 every
/// slack ratio `a_i(x+)/a_i(x)` lies in `[3/4, 4/3]`.
pub fn kappa(be: &BarrierEval, dir: &Direction, alpha: f64, l1: f64) -> f64 {
    alpha * slack_ratio(&be.slack, &dir.ds)
        + l1 * (alpha * dir.dx.norm()).powi(2) * be.dual.norm() / be.mu
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub psi: f64,
    pub grad_norm: f64,
    pub min_slack: f64,
    pub y_norm1: f64,
    pub r: f64,
    pub alpha: f64,
    pub delta: f64,
    pub model: f64,
    pub s_ratio: f64,
    /// Approximate Fritz John flags at the candidate pair.
    pub fj1: bool,
    pub fj2: bool,
    /// Smallest barrier-Hessian eigenvalue at the candidate point.
    pub min_eig: f64,
}

/// Everything computed in one iteration, handed to observers.
pub struct IpmStep<'a> {
    pub k: usize,
    pub eval: &'a BarrierEval,
    pub direction: &'a Direction,
    pub alpha: f64,
    pub x_next: &'a Vector,
    pub y_next: &'a Vector,
    pub fj: &'a FjResiduals,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IpmOutcome {
    Certified(Certificate),
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct IpmReport {
    pub outcome: IpmOutcome,
    /// Final primal point (the certified candidate, or the last iterate).
    pub x: Vector,
    /// Final dual estimate.
    pub y: Vector,
    pub trace: Vec<IterateRecord>,
    pub params: IpmParams,
}

impl IpmReport {
    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.outcome {
            IpmOutcome::Certified(c) => Some(c),
            IpmOutcome::IterationLimit => None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn into_certificate(self) -> Result<Certificate> {
        match self.outcome {
            IpmOutcome::Certified(c) => Ok(c),
            IpmOutcome::IterationLimit => Err(Error::IterationLimit {
                limit: self.params.max_iters,
            }),
        }
    }
}

/// Runs the method from a strictly feasible `x0`.
pub fn trust_ipm(p: &dyn ProblemOracle, params: &IpmParams, x0: &Vector) -> Result<IpmReport> {
    trust_ipm_observed(p, params, x0, &mut |_| {})
}

/// [`trust_ipm`] with a callback invoked once per iteration.
pub fn trust_ipm_observed(
    p: &dyn ProblemOracle,
    params: &IpmParams,
    x0: &Vector,
    observer: &mut dyn FnMut(&IpmStep<'_>),
) -> Result<IpmReport> {
    params.validate()?;
    check_dim(p, x0)?;
    if let Some((index, value)) = first_violation(&p.a(x0)) {
        return Err(Error::BoundaryViolation { index, value });
    }
    let l1 = p.lipschitz().l1;
    let mu = params.mu;
    let mut x = x0.clone();
    let mut trace = Vec::new();

    for k in 0..params.max_iters {
        let be = barrier_eval(p, mu, &x)?;
        let r = trust_radius(mu, l1, &be.dual, params.eta_x);
        let dir = direction_at(&be, r)?;
        let alpha = step_size(&be.slack, &dir.ds, params.eta_s);
        let x_next = &x + &dir.dx * alpha;
        let y_next = &be.dual + &dir.dy * alpha;
        if let Some((index, value)) = first_violation(&p.a(&x_next)) {
            // The step rule keeps iterates interior; reaching this is a bug.
            return Err(Error::BoundaryViolation { index, value });
        }
        let fj = fj_residuals(p, mu, params.tau_l, params.tau_c, &x_next, &y_next)?;
        observer(&IpmStep {
            k,
            eval: &be,
            direction: &dir,
            alpha,
            x_next: &x_next,
            y_next: &y_next,
            fj: &fj,
        });
        trace.push(IterateRecord {
            k,
            x: x.as_slice().to_vec(),
            psi: be.value,
            grad_norm: be.grad.norm(),
            min_slack: crate::linalg::min_entry(&be.slack),
            y_norm1: norm1(&be.dual),
            r,
            alpha,
            delta: dir.delta,
            model: dir.model_at_dx,
            s_ratio: slack_ratio(&be.slack, &dir.ds),
            fj1: fj.fj1,
            fj2: fj.fj2,
            min_eig: fj.min_eig,
        });
        let second_order = params.mode == Mode::Nonconvex;
        if fj.fj1 && (!second_order || fj.fj2) {
            let cert = fj
                .certificate(&x_next, &y_next, second_order)
                .map_err(|f| Error::CertificateVerificationFailed(f.to_string()))?;
            return Ok(IpmReport {
                outcome: IpmOutcome::Certified(cert),
                x: x_next,
                y: y_next,
                trace,
                params: *params,
            });
        }
        x = x_next;
    }
    let y = barrier_eval(p, mu, &x)?.dual;
    Ok(IpmReport {
        outcome: IpmOutcome::IterationLimit,
        x,
        y,
        trace,
        params: *params,
    })
}

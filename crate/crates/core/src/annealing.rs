//! Decreasing-mu outer loop for convex problems.
//!
//! Solve the barrier problem at `mu`, halve `mu`, warm-start from the last
//! point, and stop once `2 mu m <= eps`.

use serde::{Deserialize, Serialize};

use crate::barrier::{lagrangian_grad, Certificate};
use crate::error::{Error, Result};
use crate::ipm::{trust_ipm, IpmParams, IterateRecord, Mode};
use crate::linalg::norm1;
use crate::problem::{check_dim, first_violation, ProblemOracle};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub mu0: f64,
    pub eps: f64,
    /// Bound `R` on `|x|_2` over the feasible set.
    pub radius: f64,
    /// Held fixed across outer iterations.
    pub tau_l: f64,
    pub max_outer: usize,
    /// Dual bound `zeta` with `|y|_1 + 1 <= zeta` expected; only monitored.
    pub zeta: Option<f64>,
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu0", self.mu0),
            ("eps", self.eps),
            ("R", self.radius),
            ("tau_l", self.tau_l),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidArgument("max_outer must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of one inner barrier solve.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub x: Vector,
    pub y: Vector,
    pub iterations: usize,
    pub certificate: Certificate,
    pub tau_c: f64,
    /// Per-iteration records of the inner solve, if the solver keeps them.
    pub trace: Vec<IterateRecord>,
}

/// A fixed-mu solver returning a certified approximate barrier minimizer.
pub trait InnerSolver {
    fn solve(&self, p: &dyn ProblemOracle, mu: f64, tau_l: f64, x0: &Vector)
        -> Result<InnerResult>;
}

/// Trust-region IPM in convex mode with parameters recomputed from `mu`.
#[derive(Debug, Clone, Copy)]
pub struct TrustIpmInner {
    pub max_iters: usize,
}

impl Default for TrustIpmInner {
    fn default() -> Self {
        Self {
            max_iters: crate::ipm::MAX_ITERS_CAP,
        }
    }
}

impl InnerSolver for TrustIpmInner {
    fn solve(
        &self,
        p: &dyn ProblemOracle,
        mu: f64,
        tau_l: f64,
        x0: &Vector,
    ) -> Result<InnerResult> {
        let lip = p.lipschitz();
        let (params, _) =
            IpmParams::from_theory(mu, tau_l, lip.l1, lip.l2, Mode::Convex, self.max_iters);
        let report = trust_ipm(p, &params, x0)?;
        let iterations = report.iterations();
        let (x, y) = (report.x.clone(), report.y.clone());
        let trace = report.trace.clone();
        let certificate = report.into_certificate()?;
        Ok(InnerResult {
            x,
            y,
            iterations,
            certificate,
            tau_c: params.tau_c,
            trace,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub j: usize,
    pub mu: f64,
    pub inner_iterations: usize,
    pub f: f64,
    pub lag_norm: f64,
    pub comp_err: f64,
    pub y_norm1: f64,
    /// `|y|_1 + 1 <= zeta`, when `zeta` was supplied.
    pub dual_bound_ok: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct AnnealReport {
    pub x: Vector,
    pub y: Vector,
    /// Index `J` of the last outer iteration (`J + 1` inner solves).
    pub outer_count: usize,
    pub mu_final: f64,
    pub outer: Vec<OuterRecord>,
    pub certificate: Certificate,
}

/// `ceil(log2(2 mu0 m / eps))`, or 0 when `eps >= 2 mu0 m`.
pub fn expected_outer_count(mu0: f64, m: usize, eps: f64) -> usize {
    let ratio = 2.0 * mu0 * m as f64 / eps;
    if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as usize
    }
}

/// Runs the outer loop with the default inner solver.
pub fn annealed_ipm(
    p: &dyn ProblemOracle,
    cfg: &AnnealConfig,
    x0: &Vector,
    inner_max_iters: usize,
) -> Result<AnnealReport> {
    annealed_ipm_with(
        p,
        cfg,
        x0,
        &TrustIpmInner {
            max_iters: inner_max_iters,
        },
    )
}

pub fn annealed_ipm_with(
    p: &dyn ProblemOracle,
    cfg: &AnnealConfig,
    x0: &Vector,
    inner: &dyn InnerSolver,
) -> Result<AnnealReport> {
    cfg.validate()?;
    check_dim(p, x0)?;
    if let Some((index, value)) = first_violation(&p.a(x0)) {
        return Err(Error::BoundaryViolation { index, value });
    }
    let m = p.m() as f64;
    let mut x = x0.clone();
    let mut mu = cfg.mu0;
    let mut outer = Vec::new();
    for j in 0..cfg.max_outer {
        let res = inner.solve(p, mu, cfg.tau_l, &x)?;
        let a = p.a(&res.x);
        let comp_err = a
            .iter()
            .zip(res.y.iter())
            .map(|(ai, yi)| (ai * yi - mu).abs())
            .fold(0.0_f64, f64::max);
        let y_norm1 = norm1(&res.y);
        outer.push(OuterRecord {
            j,
            mu,
            inner_iterations: res.iterations,
            f: p.f(&res.x),
            lag_norm: lagrangian_grad(p, &res.x, &res.y).norm(),
            comp_err,
            y_norm1,
            dual_bound_ok: cfg.zeta.map(|z| y_norm1 + 1.0 <= z),
        });
        x = res.x;
        if 2.0 * mu * m <= cfg.eps {
            return Ok(AnnealReport {
                x,
                y: res.y,
                outer_count: j,
                mu_final: mu,
                outer,
                certificate: res.certificate,
            });
        }
        mu /= 2.0;
    }
    Err(Error::IterationLimit {
        limit: cfg.max_outer,
    })
}

/// `|grad_x L(x, y)| R + sum_i (a_i(x) y_i - mu)`, an upper bound on
/// `psi_mu(x) - inf psi_mu` (on `f(x) - f*` when `mu = 0`) for convex
/// problems. Requires `a_i(x) y_i >= mu` for every `i`.
pub fn suboptimality_bound(
    p: &dyn ProblemOracle,
    radius: f64,
    mu: f64,
    x: &Vector,
    y: &Vector,
) -> Result<f64> {
    check_dim(p, x)?;
    if y.len() != p.m() {
        return Err(Error::InvalidArgument(
            "dual length does not match m".into(),
        ));
    }
    let a = p.a(x);
    if let Some((index, value)) = first_violation(&a) {
        return Err(Error::BoundaryViolation { index, value });
    }
    let mut gap = 0.0;
    for (i, (ai, yi)) in a.iter().zip(y.iter()).enumerate() {
        let c = ai * yi;
        if !(c >= mu) || !(*yi > 0.0) {
            return Err(Error::PremiseViolated(format!(
                "a_{i}(x) y_{i} = {c} is below mu = {mu} (or y_{i} <= 0)"
            )));
        }
        gap += c - mu;
    }
    Ok(lagrangian_grad(p, x, y).norm() * radius + gap)
}

/// `1 + (3 m mu + 2 L0 R) / gamma`: bound on `|y|_1` at approximate
/// Fritz John points when a point with `a(z) >= gamma` exists and
/// [`slater_premise`] holds.
pub fn slater_dual_bound(m: usize, mu: f64, l0: f64, radius: f64, gamma: f64) -> f64 {
    1.0 + (3.0 * m as f64 * mu + 2.0 * l0 * radius) / gamma
}

/// `mu <= gamma / (2 tau_l R)`.
pub fn slater_premise(mu: f64, gamma: f64, tau_l: f64, radius: f64) -> bool {
    mu <= gamma / (2.0 * tau_l * radius)
}

/// `tau_l = m / (R sqrt(zeta))` and
/// `mu0 = min(L1 R^2 zeta / m^2, L1^4 m / (R L2^3 sqrt(zeta)))`; needs `zeta > 1`.
pub fn convex_defaults(m: usize, radius: f64, zeta: f64, l1: f64, l2: f64) -> Result<(f64, f64)> {
    if !(zeta > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "zeta must exceed 1, got {zeta}"
        )));
    }
    if m == 0 || !(radius > 0.0 && l1 > 0.0 && l2 > 0.0) {
        return Err(Error::InvalidArgument(
            "m, R, L1, L2 must be positive".into(),
        ));
    }
    let m = m as f64;
    let tau_l = m / (radius * zeta.sqrt());
    let mu0 = (l1 * radius * radius * zeta / (m * m))
        .min(l1.powi(4) * m / (radius * l2.powi(3) * zeta.sqrt()));
    Ok((tau_l, mu0))
}

//! Two-phase driver: phase one minimizes the infinity-norm constraint
//! violation, phase two minimizes `f` under constraints relaxed by `eps_opt`.
//! The result is a verified unscaled KKT point or an infeasibility
//! certificate.

use crate::barrier::{inf_residuals, kkt_residuals, Certificate};
use crate::error::{Error, Result};
use crate::ipm::{trust_ipm, IpmParams, IpmReport, Mode};
use crate::linalg::{min_entry, norm1};
use crate::problem::{check_dim, LipschitzConstants, ProblemOracle};
use crate::{Matrix, Vector};

/// Phase-one program in the variables `(x, t)`:
///
/// ```text
/// minimize t  s.t.  a(x) + t 1 >= 0,  t >= 0,  eps_opt/2 + t0 - t >= 0
/// ```
pub struct PhaseOneProblem<'a> {
    base: &'a dyn ProblemOracle,
    pub eps_opt: f64,
    pub t0: f64,
    lip: LipschitzConstants,
}

impl<'a> PhaseOneProblem<'a> {
    pub fn base(&self) -> &dyn ProblemOracle {
        self.base
    }
}

impl ProblemOracle for PhaseOneProblem<'_> {
    fn n(&self) -> usize {
        self.base.n() + 1
    }
    fn m(&self) -> usize {
        self.base.m() + 2
    }
    fn f(&self, z: &Vector) -> f64 {
        z[self.base.n()]
    }
    fn grad_f(&self, _z: &Vector) -> Vector {
        let mut g = Vector::zeros(self.n());
        g[self.base.n()] = 1.0;
        g
    }
    fn hess_f(&self, _z: &Vector) -> Matrix {
        Matrix::zeros(self.n(), self.n())
    }
    fn a(&self, z: &Vector) -> Vector {
        let n = self.base.n();
        let t = z[n];
        let x = z.rows(0, n).into_owned();
        let base = self.base.a(&x);
        let mut a = Vector::zeros(self.m());
        a.rows_mut(0, base.len()).copy_from(&base.add_scalar(t));
        a[base.len()] = t;
        a[base.len() + 1] = self.eps_opt / 2.0 + self.t0 - t;
        a
    }
    fn jac_a(&self, z: &Vector) -> Matrix {
        let (n, m) = (self.base.n(), self.base.m());
        let x = z.rows(0, n).into_owned();
        let mut j = Matrix::zeros(m + 2, n + 1);
        j.view_mut((0, 0), (m, n)).copy_from(&self.base.jac_a(&x));
        for i in 0..m {
            j[(i, n)] = 1.0;
        }
        j[(m, n)] = 1.0;
        j[(m + 1, n)] = -1.0;
        j
    }
    fn hess_a(&self, z: &Vector, i: usize) -> Matrix {
        let n = self.base.n();
        let mut h = Matrix::zeros(n + 1, n + 1);
        if i < self.base.m() {
            let x = z.rows(0, n).into_owned();
            h.view_mut((0, 0), (n, n))
                .copy_from(&self.base.hess_a(&x, i));
        }
        h
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

/// The base program with constraints `a(x) + eps_opt 1 >= 0`.
pub struct PhaseTwoProblem<'a> {
    base: &'a dyn ProblemOracle,
    pub eps_opt: f64,
    lip: LipschitzConstants,
}

impl ProblemOracle for PhaseTwoProblem<'_> {
    fn n(&self) -> usize {
        self.base.n()
    }
    fn m(&self) -> usize {
        self.base.m()
    }
    fn f(&self, x: &Vector) -> f64 {
        self.base.f(x)
    }
    fn grad_f(&self, x: &Vector) -> Vector {
        self.base.grad_f(x)
    }
    fn hess_f(&self, x: &Vector) -> Matrix {
        self.base.hess_f(x)
    }
    fn a(&self, x: &Vector) -> Vector {
        self.base.a(x).add_scalar(self.eps_opt)
    }
    fn jac_a(&self, x: &Vector) -> Matrix {
        self.base.jac_a(x)
    }
    fn hess_a(&self, x: &Vector, i: usize) -> Matrix {
        self.base.hess_a(x, i)
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

fn check_eps(eps_opt: f64) -> Result<()> {
    if !(eps_opt > 0.0 && eps_opt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eps_opt must be finite and > 0, got {eps_opt}"
        )));
    }
    Ok(())
}

/// Phase-one program and its strictly feasible start `(x0, t0)` with
/// `t0 = eps_opt/2 + max(max_i -a_i(x0), 0)`.
pub fn build_phase_one<'a>(
    p: &'a dyn ProblemOracle,
    x0: &Vector,
    eps_opt: f64,
) -> Result<(PhaseOneProblem<'a>, Vector)> {
    check_eps(eps_opt)?;
    check_dim(p, x0)?;
    let worst = p.a(x0).iter().fold(0.0_f64, |acc, ai| acc.max(-ai));
    let t0 = eps_opt / 2.0 + worst;
    let problem = PhaseOneProblem {
        base: p,
        eps_opt,
        t0,
        lip: p.lipschitz(),
    };
    let mut start = Vector::zeros(p.n() + 1);
    start.rows_mut(0, p.n()).copy_from(x0);
    start[p.n()] = t0;
    Ok((problem, start))
}

pub fn build_phase_two(p: &dyn ProblemOracle, eps_opt: f64) -> Result<PhaseTwoProblem<'_>> {
    check_eps(eps_opt)?;
    Ok(PhaseTwoProblem {
        base: p,
        eps_opt,
        lip: p.lipschitz(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhaseConfig {
    pub eps_opt: f64,
    pub eps_inf: f64,
    /// Overrides of the problem's `L0`, `L1` in the parameter formulas.
    pub l0: Option<f64>,
    pub l1: Option<f64>,
    /// Iteration cap for each phase.
    pub max_iters: usize,
}

impl TwoPhaseConfig {
    pub fn new(eps_opt: f64, eps_inf: f64) -> Self {
        Self {
            eps_opt,
            eps_inf,
            l0: None,
            l1: None,
            max_iters: crate::ipm::MAX_ITERS_CAP,
        }
    }

    /// Advisory checks `eps_opt <= sqrt(eps_inf)` and `eps_inf <= L0 / m`.
    pub fn warnings(&self, l0: f64, m: usize) -> Vec<String> {
        let mut w = Vec::new();
        if self.eps_opt > self.eps_inf.sqrt() {
            w.push(format!(
                "eps_opt = {} exceeds sqrt(eps_inf) = {}",
                self.eps_opt,
                self.eps_inf.sqrt()
            ));
        }
        if self.eps_inf > l0 / m as f64 {
            w.push(format!(
                "eps_inf = {} exceeds L0 / m = {}",
                self.eps_inf,
                l0 / m as f64
            ));
        }
        w
    }
}

/// `(mu, tau_l)` of phase one: `eps_inf eps_opt / 12` and
/// `min(1 / eps_opt, sqrt(L1 / (2 eps_opt eps_inf)))`.
pub fn phase_one_params(eps_opt: f64, eps_inf: f64, l1: f64) -> (f64, f64) {
    let mu = eps_inf * eps_opt / 12.0;
    let tau_l = (1.0 / eps_opt).min((l1 / (2.0 * eps_opt * eps_inf)).sqrt());
    (mu, tau_l)
}

/// `(mu, tau_l)` of phase two: `eps_opt / 4` and `sqrt(eps_inf / (2 (L0 + 1)))`.
pub fn phase_two_params(eps_opt: f64, eps_inf: f64, l0: f64) -> (f64, f64) {
    (eps_opt / 4.0, (eps_inf / (2.0 * (l0 + 1.0))).sqrt())
}

#[derive(Debug, Clone)]
pub struct TwoPhaseReport {
    pub certificate: Certificate,
    /// `None` when phase one was skipped.
    pub phase_one: Option<IpmReport>,
    /// `None` when phase one already proved infeasibility.
    pub phase_two: Option<IpmReport>,
    pub warnings: Vec<String>,
}

fn normalized(y: &Vector) -> Vector {
    let s = norm1(y);
    y / s
}

fn limit_or(report: &IpmReport) -> Result<()> {
    match report.certificate() {
        Some(_) => Ok(()),
        None => Err(Error::IterationLimit {
            limit: report.params.max_iters,
        }),
    }
}

/// Runs both phases from any `x0` and returns a verified certificate.
pub fn two_phase_ipm(
    p: &dyn ProblemOracle,
    cfg: &TwoPhaseConfig,
    x0: &Vector,
) -> Result<TwoPhaseReport> {
    match two_phase_partial(p, cfg, x0)? {
        TwoPhaseRun::Done(r) => Ok(r),
        TwoPhaseRun::Limit { limit, .. } => Err(Error::IterationLimit { limit }),
    }
}

/// Outcome of [`two_phase_partial`].
#[derive(Debug, Clone)]
pub enum TwoPhaseRun {
    Done(TwoPhaseReport),
    /// A phase hit its iteration cap; the reports gathered so far are kept.
    Limit {
        limit: usize,
        phase_one: Option<IpmReport>,
        phase_two: Option<IpmReport>,
    },
}

/// Like [`two_phase_ipm`] but a phase hitting its iteration cap is reported
/// together with the traces gathered so far.
pub fn two_phase_partial(
    p: &dyn ProblemOracle,
    cfg: &TwoPhaseConfig,
    x0: &Vector,
) -> Result<TwoPhaseRun> {
    let (eps_opt, eps_inf) = (cfg.eps_opt, cfg.eps_inf);
    check_eps(eps_opt)?;
    if !(eps_inf > 0.0 && eps_inf.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eps_inf must be finite and > 0, got {eps_inf}"
        )));
    }
    let lip = p.lipschitz();
    let l0 = cfg.l0.unwrap_or(lip.l0);
    let l1 = cfg.l1.unwrap_or(lip.l1);
    let mut warnings = cfg.warnings(l0, p.m());
    let m = p.m();

    let (phase1, start) = build_phase_one(p, x0, eps_opt)?;
    let mut x1 = x0.clone();
    let mut phase_one = None;
    if phase1.t0 > eps_opt / 2.0 {
        let (mu, tau_l) = phase_one_params(eps_opt, eps_inf, l1);
        let (params, w) =
            IpmParams::from_theory(mu, tau_l, l1, lip.l2, Mode::Nonconvex, cfg.max_iters);
        warnings.extend(w.into_iter().map(|s| format!("phase one: {s}")));
        let phase1 = PhaseOneProblem {
            lip: LipschitzConstants { l1, ..phase1.lip },
            ..phase1
        };
        let report = trust_ipm(&phase1, &params, &start)?;
        if let Err(Error::IterationLimit { limit }) = limit_or(&report) {
            return Ok(TwoPhaseRun::Limit {
                limit,
                phase_one: Some(report),
                phase_two: None,
            });
        }
        x1 = report.x.rows(0, p.n()).into_owned();
        let t1 = report.x[p.n()];
        if min_entry(&p.a(&x1)) < -eps_opt / 2.0 {
            let y = normalized(&report.y.rows(0, m).into_owned());
            let certificate = inf_residuals(p, eps_opt, eps_inf, &x1, t1, &y)?
                .map_err(|f| Error::CertificateVerificationFailed(f.to_string()))?;
            return Ok(TwoPhaseRun::Done(TwoPhaseReport {
                certificate,
                phase_one: Some(report),
                phase_two: None,
                warnings,
            }));
        }
        phase_one = Some(report);
    }

    let phase2 = PhaseTwoProblem {
        lip: LipschitzConstants { l1, ..lip },
        ..build_phase_two(p, eps_opt)?
    };
    let (mu, tau_l) = phase_two_params(eps_opt, eps_inf, l0);
    let (params, w) = IpmParams::from_theory(mu, tau_l, l1, lip.l2, Mode::Nonconvex, cfg.max_iters);
    warnings.extend(w.into_iter().map(|s| format!("phase two: {s}")));
    let report = trust_ipm(&phase2, &params, &x1)?;
    if let Err(Error::IterationLimit { limit }) = limit_or(&report) {
        return Ok(TwoPhaseRun::Limit {
            limit,
            phase_one,
            phase_two: Some(report),
        });
    }
    let (x2, y2) = (&report.x, &report.y);
    let certificate = if norm1(y2) > 1.0 / eps_inf {
        inf_residuals(p, eps_opt, eps_inf, x2, eps_opt, &normalized(y2))?
    } else {
        kkt_residuals(p, eps_opt, x2, y2)?
    }
    .map_err(|f| Error::CertificateVerificationFailed(f.to_string()))?;
    Ok(TwoPhaseRun::Done(TwoPhaseReport {
        certificate,
        phase_one,
        phase_two: Some(report),
        warnings,
    }))
}

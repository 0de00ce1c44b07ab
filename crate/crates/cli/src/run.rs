//! Executes one configured solve and writes its outputs.

use std::cell::RefCell;
use std::fs;

use serde_json::{json, Value};
use tripm::annealing::{annealed_ipm_with, InnerResult, InnerSolver, OuterRecord};
use tripm::barrier::CertificateKind;
use tripm::gd::{gd_stop, GdTrace};
use tripm::ipm::nonconvex_iteration_bound;
use tripm::two_phase::{two_phase_partial, TwoPhaseRun};
use tripm::{
    adaptive_gd, barrier_eval, builtin_problem, fixed_step_gd, fj_residuals, inf_residuals,
    kkt_residuals, trust_ipm, Certificate, Error, GdOutcome, IpmOutcome, IpmParams, Mode,
    ProblemOracle, Vector,
};

use crate::config::{RunConfig, SolverSpec};
use crate::error::CliError;
use crate::trace::{self, TraceRow};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Certified,
    IterationLimit,
    LeftFeasibleRegion { k: usize },
    VerificationFailed(String),
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::IterationLimit | Status::LeftFeasibleRegion { .. } => 2,
            Status::VerificationFailed(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::IterationLimit => "iteration_limit",
            Status::LeftFeasibleRegion { .. } => "left_feasible_region",
            Status::VerificationFailed(_) => "verification_failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: Status,
    pub n: usize,
    pub trace: Vec<TraceRow>,
    /// Phase-one rows of a two-phase run, in the `(x, t)` variables.
    pub phase_one: Option<Vec<TraceRow>>,
    pub outer: Option<Vec<OuterRecord>>,
    /// Certificate JSON, or the stopping summary for gradient descent.
    pub result: Option<Value>,
    pub kind: Option<String>,
    pub warnings: Vec<String>,
    /// `2 + 2 (psi_0 - psi_last) / pair_decrease` for nonconvex trust_ipm runs.
    pub iteration_bound: Option<f64>,
}

impl RunOutput {
    fn new(status: Status, n: usize, trace: Vec<TraceRow>) -> Self {
        Self {
            status,
            n,
            trace,
            phase_one: None,
            outer: None,
            result: None,
            kind: None,
            warnings: Vec::new(),
            iteration_bound: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.trace.len() + self.phase_one.as_ref().map_or(0, Vec::len)
    }

    fn certified(mut self, cert: &Certificate, check: Result<(), String>) -> Self {
        self.kind = Some(cert.kind.to_string());
        self.result = serde_json::to_value(cert).ok();
        self.status = match check {
            Ok(()) => Status::Certified,
            Err(m) => Status::VerificationFailed(m),
        };
        self
    }
}

fn fj_check(
    p: &dyn ProblemOracle,
    cert: &Certificate,
    mu: f64,
    tau_l: f64,
    tau_c: f64,
    second_order: bool,
) -> Result<Result<(), String>, CliError> {
    let (x, y) = (cert.x_vec(), cert.y_vec());
    let fj = fj_residuals(p, mu, tau_l, tau_c, &x, &y)?;
    Ok(fj
        .certificate(&x, &y, second_order)
        .map(|_| ())
        .map_err(|f| f.to_string()))
}

/// Recomputes the residuals of a KKT or infeasibility certificate.
fn two_phase_check(
    p: &dyn ProblemOracle,
    cert: &Certificate,
    eps_opt: f64,
    eps_inf: f64,
) -> Result<Result<(), String>, CliError> {
    let (x, y) = (cert.x_vec(), cert.y_vec());
    let checked = match (cert.kind, cert.t) {
        (CertificateKind::Kkt, _) => kkt_residuals(p, eps_opt, &x, &y)?,
        (CertificateKind::Infeasible, Some(t)) => inf_residuals(p, eps_opt, eps_inf, &x, t, &y)?,
        (kind, _) => return Ok(Err(format!("unexpected certificate kind {kind}"))),
    };
    Ok(checked.map(|_| ()).map_err(|f| f.to_string()))
}

/// Convex-mode trust_ipm inner solver that keeps every inner trace row.
struct RecordingInner {
    max_iters: usize,
    rows: RefCell<Vec<TraceRow>>,
    last: RefCell<Option<(f64, f64)>>,
}

impl InnerSolver for RecordingInner {
    fn solve(
        &self,
        p: &dyn ProblemOracle,
        mu: f64,
        tau_l: f64,
        x0: &Vector,
    ) -> tripm::Result<InnerResult> {
        let lip = p.lipschitz();
        let (params, _) =
            IpmParams::from_theory(mu, tau_l, lip.l1, lip.l2, Mode::Convex, self.max_iters);
        let report = trust_ipm(p, &params, x0)?;
        self.rows
            .borrow_mut()
            .extend(report.trace.iter().map(TraceRow::from));
        *self.last.borrow_mut() = Some((mu, params.tau_c));
        let iterations = report.iterations();
        let (x, y, trace) = (report.x.clone(), report.y.clone(), report.trace.clone());
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

fn gd_output(
    p: &dyn ProblemOracle,
    t: GdTrace,
    mu: f64,
    tau_l: f64,
) -> Result<RunOutput, CliError> {
    let rows = t.rows.iter().map(TraceRow::from).collect();
    let status = match t.outcome {
        GdOutcome::IterationLimit => Status::IterationLimit,
        GdOutcome::LeftFeasibleRegion { k } => Status::LeftFeasibleRegion { k },
        GdOutcome::Converged => Status::Certified,
    };
    let mut out = RunOutput::new(status, p.n(), rows);
    if out.status == Status::Certified {
        let be = barrier_eval(p, mu, &Vector::from_column_slice(&t.x))?;
        let grad_norm = be.grad.norm();
        let bound = tau_l * mu * (1.0 + tripm::linalg::norm1(&be.dual));
        if !gd_stop(grad_norm, tau_l, mu, &be.dual) {
            out.status = Status::VerificationFailed(format!(
                "grad_norm {grad_norm} exceeds stopping bound {bound}"
            ));
        }
        out.kind = Some("Stationary".into());
        out.result = Some(json!({
            "kind": "Stationary",
            "x": t.x.as_slice(),
            "y": be.dual.as_slice(),
            "mu": mu,
            "grad_norm": grad_norm,
            "stop_bound": bound,
        }));
    }
    Ok(out)
}

/// Runs the configured solver. Outputs are not written; see [`write_outputs`].
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let spec = cfg.solver_spec()?;
    let p = builtin_problem(&cfg.problem.name, &cfg.problem.params)?;
    let p = p.as_ref();
    if cfg.x0.len() != p.n() {
        return Err(CliError::Config(format!(
            "x0 has length {} but problem {} has n = {}",
            cfg.x0.len(),
            cfg.problem.name,
            p.n()
        )));
    }
    let x0 = Vector::from_column_slice(&cfg.x0);
    let lip = p.lipschitz();
    match spec {
        SolverSpec::TrustIpm {
            mu,
            tau_l,
            mode,
            max_iters,
        } => {
            let (params, warnings) =
                IpmParams::from_theory(mu, tau_l, lip.l1, lip.l2, mode, max_iters);
            let rep = trust_ipm(p, &params, &x0)?;
            let rows: Vec<TraceRow> = rep.trace.iter().map(TraceRow::from).collect();
            let mut out = RunOutput::new(Status::IterationLimit, p.n(), rows);
            out.warnings = warnings;
            if mode == Mode::Nonconvex {
                if let (Some(first), Some(last)) = (rep.trace.first(), rep.trace.last()) {
                    out.iteration_bound = Some(nonconvex_iteration_bound(
                        first.psi,
                        last.psi,
                        mu,
                        params.tau_l,
                        lip.l1,
                    ));
                }
            }
            Ok(match &rep.outcome {
                IpmOutcome::Certified(cert) => {
                    let check = fj_check(
                        p,
                        cert,
                        params.mu,
                        params.tau_l,
                        params.tau_c,
                        mode == Mode::Nonconvex,
                    )?;
                    out.certified(cert, check)
                }
                IpmOutcome::IterationLimit => out,
            })
        }
        SolverSpec::Annealed {
            cfg: acfg,
            max_iters,
        } => {
            let inner = RecordingInner {
                max_iters,
                rows: RefCell::new(Vec::new()),
                last: RefCell::new(None),
            };
            let res = annealed_ipm_with(p, &acfg, &x0, &inner);
            let rows = inner.rows.take();
            match res {
                Ok(rep) => {
                    let (mu, tau_c) = inner.last.take().expect("at least one inner solve");
                    let check = fj_check(p, &rep.certificate, mu, acfg.tau_l, tau_c, false)?;
                    let mut out = RunOutput::new(Status::Certified, p.n(), rows);
                    out.outer = Some(rep.outer.clone());
                    Ok(out.certified(&rep.certificate, check))
                }
                Err(Error::IterationLimit { .. }) => {
                    Ok(RunOutput::new(Status::IterationLimit, p.n(), rows))
                }
                Err(e) => Err(e.into()),
            }
        }
        SolverSpec::TwoPhase(tcfg) => {
            let rows = |r: &Option<tripm::IpmReport>| {
                r.as_ref()
                    .map(|r| r.trace.iter().map(TraceRow::from).collect::<Vec<_>>())
            };
            match two_phase_partial(p, &tcfg, &x0)? {
                TwoPhaseRun::Done(rep) => {
                    let mut out = RunOutput::new(
                        Status::Certified,
                        p.n(),
                        rows(&rep.phase_two).unwrap_or_default(),
                    );
                    out.phase_one = rows(&rep.phase_one);
                    out.warnings = rep.warnings.clone();
                    let check = two_phase_check(p, &rep.certificate, tcfg.eps_opt, tcfg.eps_inf)?;
                    Ok(out.certified(&rep.certificate, check))
                }
                TwoPhaseRun::Limit {
                    phase_one,
                    phase_two,
                    ..
                } => {
                    let mut out = RunOutput::new(
                        Status::IterationLimit,
                        p.n(),
                        rows(&phase_two).unwrap_or_default(),
                    );
                    out.phase_one = rows(&phase_one);
                    Ok(out)
                }
            }
        }
        SolverSpec::GdFixed {
            mu,
            alpha,
            tau_l,
            max_iters,
        } => {
            let t = fixed_step_gd(p, mu, alpha, tau_l, &x0, max_iters)?;
            gd_output(p, t, mu, tau_l)
        }
        SolverSpec::GdAdaptive {
            mu,
            tau_l,
            max_iters,
        } => {
            let t = adaptive_gd(p, mu, tau_l, lip.l0, lip.l1, &x0, max_iters)?;
            gd_output(p, t, mu, tau_l)
        }
    }
}

/// Writes the trace CSV (plus `_phase1` / `_outer` siblings) and the
/// certificate JSON to the configured paths.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput) -> Result<(), CliError> {
    if let Some(path) = &cfg.output.trace_path {
        let path = cfg.resolve(path);
        let wide = |n: usize| cfg.output.x_columns.then_some(n);
        trace::write(&path, &out.trace, wide(out.n))?;
        if let Some(rows) = &out.phase_one {
            trace::write(&trace::sibling(&path, "_phase1"), rows, wide(out.n + 1))?;
        }
        if let Some(outer) = &out.outer {
            trace::write_outer(&trace::sibling(&path, "_outer"), outer)?;
        }
    }
    if let (Some(path), Some(result)) = (&cfg.output.cert_path, &out.result) {
        let path = cfg.resolve(path);
        trace::ensure_parent(&path)?;
        let text = serde_json::to_string_pretty(result)
            .map_err(|e| CliError::Solver(format!("cannot serialize certificate: {e}")))?;
        fs::write(&path, text + "\n")?;
    }
    Ok(())
}

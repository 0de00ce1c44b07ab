//! Approximate Fritz John, unscaled KKT and infinity-norm infeasibility
//! tests.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{barrier_eval, lagrangian_grad};
use crate::error::{Error, Result};
use crate::linalg::{max_entry, min_eigenvalue, min_entry, norm1};
use crate::problem::{check_dim, ProblemOracle};
use crate::Vector;

/// Absolute tolerance on `|y|_1 = 1` for infeasibility certificates.
pub const INF_NORM1_TOL: f64 = 1e-12;

/// Direction of a residual inequality: `value <sense> bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Lt,
    Ge,
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub bound: f64,
    pub sense: Sense,
}

impl Residual {
    pub fn le(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            sense: Sense::Le,
        }
    }
    pub fn lt(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            sense: Sense::Lt,
        }
    }
    pub fn ge(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            sense: Sense::Ge,
        }
    }
    pub fn gt(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            sense: Sense::Gt,
        }
    }

    /// Exact floating-point comparison; NaN never holds.
    pub fn holds(&self) -> bool {
        match self.sense {
            Sense::Le => self.value <= self.bound,
            Sense::Lt => self.value < self.bound,
            Sense::Ge => self.value >= self.bound,
            Sense::Gt => self.value > self.bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    FritzJohn,
    #[serde(rename = "KKT")]
    Kkt,
    Infeasible,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FritzJohn => "FritzJohn",
            Self::Kkt => "KKT",
            Self::Infeasible => "Infeasible",
        })
    }
}

/// A solver outcome together with every inequality it was verified against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub x: Vec<f64>,
    pub t: Option<f64>,
    pub y: Vec<f64>,
    pub residuals: BTreeMap<String, Residual>,
}

impl Certificate {
    /// First residual that does not hold, in name order.
    pub fn first_failure(&self) -> Option<ResidualFailure> {
        self.residuals
            .iter()
            .find(|(_, r)| !r.holds())
            .map(|(name, r)| ResidualFailure::new(name, r))
    }

    pub fn holds(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn x_vec(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }

    pub fn y_vec(&self) -> Vector {
        Vector::from_column_slice(&self.y)
    }
}

/// The first violated inequality of a certificate test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFailure {
    pub name: String,
    pub residual: Residual,
}

impl ResidualFailure {
    fn new(name: &str, residual: &Residual) -> Self {
        Self {
            name: name.to_string(),
            residual: *residual,
        }
    }
}

impl fmt::Display for ResidualFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.residual.sense {
            Sense::Le => "<=",
            Sense::Lt => "<",
            Sense::Ge => ">=",
            Sense::Gt => ">",
        };
        write!(
            f,
            "{}: {} {} {} does not hold",
            self.name, self.residual.value, op, self.residual.bound
        )
    }
}

/// Builds a certificate from residuals checked in the given order, or returns
/// the first violation.
fn certify(
    kind: CertificateKind,
    x: &Vector,
    t: Option<f64>,
    y: &Vector,
    ordered: Vec<(&str, Residual)>,
) -> std::result::Result<Certificate, ResidualFailure> {
    if let Some((name, r)) = ordered.iter().find(|(_, r)| !r.holds()) {
        return Err(ResidualFailure::new(name, r));
    }
    Ok(Certificate {
        kind,
        x: x.as_slice().to_vec(),
        t,
        y: y.as_slice().to_vec(),
        residuals: ordered
            .into_iter()
            .map(|(name, r)| (name.to_string(), r))
            .collect(),
    })
}

fn check_dual_dim(p: &dyn ProblemOracle, y: &Vector) -> Result<()> {
    if y.len() != p.m() {
        return Err(Error::InvalidArgument(format!(
            "dual has length {} but the problem has m = {}",
            y.len(),
            p.m()
        )));
    }
    Ok(())
}

/// Approximate first- and second-order Fritz John residuals at `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjResiduals {
    pub mu: f64,
    /// `a(x) > 0` and `y > 0`.
    pub feasible_primal: bool,
    pub min_slack: f64,
    pub min_dual: f64,
    /// `max_i |y_i a_i(x) - mu|`.
    pub comp_err: f64,
    /// `tau_c * mu / 2`.
    pub comp_bound: f64,
    pub lag_norm: f64,
    /// `tau_l * mu * sqrt(|y|_1 + 1)`.
    pub lag_bound: f64,
    /// Smallest eigenvalue of the barrier Hessian at `x` (NaN if `x` is not
    /// strictly feasible).
    pub min_eig: f64,
    /// `-sqrt(tau_l) * (1 + |y|_1)`.
    pub eig_bound: f64,
    pub fj1: bool,
    pub fj2: bool,
}

impl FjResiduals {
    /// Fritz John certificate for `(x, y)`; the eigenvalue test is included
    /// only when `second_order` is set.
    pub fn certificate(
        &self,
        x: &Vector,
        y: &Vector,
        second_order: bool,
    ) -> std::result::Result<Certificate, ResidualFailure> {
        let mut ordered = vec![
            ("min_slack", Residual::gt(self.min_slack, 0.0)),
            ("min_dual", Residual::gt(self.min_dual, 0.0)),
            ("comp_err", Residual::le(self.comp_err, self.comp_bound)),
            ("lag_norm", Residual::le(self.lag_norm, self.lag_bound)),
        ];
        if second_order {
            ordered.push(("min_eig", Residual::ge(self.min_eig, self.eig_bound)));
        }
        certify(CertificateKind::FritzJohn, x, None, y, ordered)
    }
}

/// Evaluates the approximate Fritz John conditions.
///
/// An infeasible `x` or a nonpositive `y` only clears `feasible_primal` and
/// `fj1`; errors are reserved for malformed input.
pub fn fj_residuals(
    p: &dyn ProblemOracle,
    mu: f64,
    tau_l: f64,
    tau_c: f64,
    x: &Vector,
    y: &Vector,
) -> Result<FjResiduals> {
    check_dim(p, x)?;
    check_dual_dim(p, y)?;
    for (name, v) in [("mu", mu), ("tau_l", tau_l), ("tau_c", tau_c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and > 0, got {v}"
            )));
        }
    }
    let a = p.a(x);
    let min_slack = min_entry(&a);
    let min_dual = min_entry(y);
    let feasible_primal = min_slack > 0.0 && min_dual > 0.0;
    let comp_err = a
        .iter()
        .zip(y.iter())
        .map(|(ai, yi)| (yi * ai - mu).abs())
        .fold(0.0_f64, f64::max);
    let comp_bound = tau_c * mu / 2.0;
    let y1 = norm1(y);
    let lag_norm = lagrangian_grad(p, x, y).norm();
    let lag_bound = tau_l * mu * (y1 + 1.0).sqrt();
    let min_eig = match barrier_eval(p, mu, x) {
        Ok(be) => min_eigenvalue(&be.hess),
        Err(_) => f64::NAN,
    };
    let eig_bound = -tau_l.sqrt() * (1.0 + y1);
    Ok(FjResiduals {
        mu,
        feasible_primal,
        min_slack,
        min_dual,
        comp_err,
        comp_bound,
        lag_norm,
        lag_bound,
        min_eig,
        eig_bound,
        fj1: feasible_primal && comp_err <= comp_bound && lag_norm <= lag_bound,
        fj2: min_eig >= eig_bound,
    })
}

/// Unscaled KKT test: `a(x) >= -eps`, `|grad L| <= eps`, `y >= 0`,
/// `a_i y_i <= eps`.
pub fn kkt_residuals(
    p: &dyn ProblemOracle,
    eps_opt: f64,
    x: &Vector,
    y: &Vector,
) -> Result<std::result::Result<Certificate, ResidualFailure>> {
    check_dim(p, x)?;
    check_dual_dim(p, y)?;
    if !(eps_opt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_opt must be > 0, got {eps_opt}"
        )));
    }
    let a = p.a(x);
    let comp = a.component_mul(y);
    let ordered = vec![
        ("min_slack", Residual::ge(min_entry(&a), -eps_opt)),
        (
            "lag_norm",
            Residual::le(lagrangian_grad(p, x, y).norm(), eps_opt),
        ),
        ("min_dual", Residual::ge(min_entry(y), 0.0)),
        ("max_comp", Residual::le(max_entry(&comp), eps_opt)),
    ];
    Ok(certify(CertificateKind::Kkt, x, None, y, ordered))
}

/// Infinity-norm infeasibility test: `min a < -eps_opt/2`, `a + t >= 0`,
/// `|J'y| <= eps_inf`, `|y|_1 = 1`, `y >= 0`, `(a_i + t) y_i <= eps_inf eps_opt`.
pub fn inf_residuals(
    p: &dyn ProblemOracle,
    eps_opt: f64,
    eps_inf: f64,
    x: &Vector,
    t: f64,
    y: &Vector,
) -> Result<std::result::Result<Certificate, ResidualFailure>> {
    check_dim(p, x)?;
    check_dual_dim(p, y)?;
    if !(eps_opt > 0.0 && eps_inf > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_opt and eps_inf must be > 0, got {eps_opt} and {eps_inf}"
        )));
    }
    let a = p.a(x);
    let shifted = a.add_scalar(t);
    let comp = shifted.component_mul(y);
    let ordered = vec![
        ("min_slack", Residual::lt(min_entry(&a), -eps_opt / 2.0)),
        ("min_shifted_slack", Residual::ge(min_entry(&shifted), 0.0)),
        (
            "grad_norm",
            Residual::le(p.jac_a(x).tr_mul(y).norm(), eps_inf),
        ),
        (
            "dual_norm1_err",
            Residual::le((norm1(y) - 1.0).abs(), INF_NORM1_TOL),
        ),
        ("min_dual", Residual::ge(min_entry(y), 0.0)),
        (
            "max_comp",
            Residual::le(max_entry(&comp), eps_inf * eps_opt),
        ),
    ];
    Ok(certify(CertificateKind::Infeasible, x, Some(t), y, ordered))
}

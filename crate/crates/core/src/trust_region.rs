//! Exact solver for the trust-region subproblem
//!
//! ```text
//! minimize 0.5 u'Hu + g'u  subject to  |u|_2 <= r
//! ```
//!
//! via one symmetric eigen-decomposition of `H` and a safeguarded Newton
//! iteration on the secular equation `1/|u(delta)| = 1/r`, where
//! `u(delta) = -(H + delta I)^-1 g`. The hard case (g orthogonal to the
//! bottom eigenspace of an indefinite `H`) is handled explicitly. The root
//! find runs in `nu = delta + lambda_min` so that shifts close to
//! `-lambda_min` keep full relative precision.

use std::collections::BTreeMap;

use crate::barrier::quadratic;
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, sorted_eigen, sym_norm2};
use crate::{Matrix, Vector};

/// Default relative tolerance on `|u| = r` for boundary solutions.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Iteration cap for the secular-equation root find.
pub const MAX_SECULAR_ITERS: usize = 200;

const HARD_CASE_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionSolution {
    pub u: Vector,
    /// Multiplier of the ball constraint.
    pub delta: f64,
    pub model_value: f64,
    pub on_boundary: bool,
    pub hard_case: bool,
}

/// Global minimizer of `0.5 u'Hu + g'u` over `|u| <= r`.
///
/// `tol` is the relative accuracy of `|u| = r` in the boundary case.
pub fn solve_trust_region(h: &Matrix, g: &Vector, r: f64, tol: f64) -> Result<TrustRegionSolution> {
    let n = g.len();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "H is {}x{} but g has length {n}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius must be finite and > 0, got {r}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("H"));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("g"));
    }

    let (lam, q) = sorted_eigen(h);
    let gt = q.tr_mul(g);
    let gnorm = g.norm();
    let lmin = lam[0];
    let scale = lam.amax().max(1.0);
    let finish = |ut: Vector, delta: f64, on_boundary: bool, hard_case: bool| {
        let u = &q * ut;
        TrustRegionSolution {
            model_value: quadratic(h, g, &u),
            u,
            delta,
            on_boundary,
            hard_case,
        }
    };

    if lmin > 0.0 {
        let u0 = Vector::from_iterator(n, (0..n).map(|i| -gt[i] / lam[i]));
        if u0.norm() <= r {
            return Ok(finish(u0, 0.0, false, false));
        }
    }

    // Bottom eigenspace and the part of g that lies in it.
    let bottom: Vec<usize> = (0..n)
        .filter(|&i| lam[i] - lmin <= HARD_CASE_REL * scale)
        .collect();
    let g_bottom = bottom.iter().map(|&i| gt[i] * gt[i]).sum::<f64>().sqrt();
    if g_bottom <= HARD_CASE_REL * gnorm || gnorm == 0.0 {
        let shift = (-lmin).max(0.0);
        let mut part = Vector::zeros(n);
        for i in 0..n {
            if !bottom.contains(&i) {
                part[i] = -gt[i] / (lam[i] + shift);
            }
        }
        let pnorm = part.norm();
        if pnorm <= r {
            if lmin >= 0.0 {
                return Ok(finish(part, 0.0, false, false));
            }
            // Tie-break: bottom eigenvector with first nonzero entry positive.
            let k = bottom[0];
            let v = q.column(k);
            let sign = match v.iter().find(|c| c.abs() > 1e-14) {
                Some(c) if *c < 0.0 => -1.0,
                _ => 1.0,
            };
            let tau = (r * r - pnorm * pnorm).max(0.0).sqrt();
            part[k] += sign * tau;
            return Ok(finish(part, shift, true, true));
        }
    }

    // Easy case: |u(delta)| = r has a root. Work with nu = delta + lambda_min
    // so that denominators close to the pole keep full relative precision.
    let gap: Vec<f64> = (0..n).map(|i| lam[i] - lmin).collect();
    let at = |nu: f64| Vector::from_iterator(n, (0..n).map(|i| -gt[i] / (gap[i] + nu)));
    let phi = |nu: f64| {
        let u = at(nu);
        let un = u.norm();
        let d: f64 = (0..n).map(|i| gt[i] * gt[i] / (gap[i] + nu).powi(3)).sum();
        (u, un, 1.0 / un - 1.0 / r, d / un.powi(3))
    };
    let mut lo = lmin.max(0.0);
    let mut hi = gnorm / r;
    if hi <= lo {
        hi = lo + gnorm / r;
    }
    let mut nu = hi;
    for _ in 0..MAX_SECULAR_ITERS {
        let (u, un, f, df) = phi(nu);
        if (un - r).abs() <= tol * r {
            return Ok(finish(u, nu - lmin, true, false));
        }
        if f < 0.0 {
            lo = lo.max(nu);
        } else {
            hi = hi.min(nu);
        }
        let newton = nu - f / df;
        nu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs() {
            let (u, _, _, _) = phi(hi);
            return Ok(finish(u, hi - lmin, true, false));
        }
    }
    Err(Error::NoConvergence(MAX_SECULAR_ITERS))
}

/// Optimality residuals of a trust-region solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrVerification {
    /// `max(|u| - r, 0)`.
    pub norm_excess: f64,
    /// `|delta (|u| - r)|`.
    pub complementarity: f64,
    /// `|(H + delta I) u + g|`.
    pub stationarity: f64,
    /// `max(-lambda_min(H + delta I), 0)`.
    pub dual_psd: f64,
    /// `max(-delta, 0)`.
    pub negative_delta: f64,
    /// `|model_value - M(u)|`.
    pub model_mismatch: f64,
    /// `max(model_value + delta r^2 / 2, 0)`; also covers `model_value <= 0`.
    pub model_excess: f64,
    /// For `H = H0 + A'A`: `max(|Au|^2 + u'H0u + 2 M(u), 0)`.
    pub split_excess: Option<f64>,
}

impl TrVerification {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::from([
            ("norm_excess".to_string(), self.norm_excess),
            ("complementarity".to_string(), self.complementarity),
            ("stationarity".to_string(), self.stationarity),
            ("dual_psd".to_string(), self.dual_psd),
            ("negative_delta".to_string(), self.negative_delta),
            ("model_mismatch".to_string(), self.model_mismatch),
            ("model_excess".to_string(), self.model_excess),
        ]);
        if let Some(v) = self.split_excess {
            map.insert("split_excess".to_string(), v);
        }
        map
    }

    pub fn max_residual(&self) -> f64 {
        self.to_map().values().fold(0.0, |a, b| a.max(*b))
    }
}

/// Recomputes the optimality conditions of `sol` independently of the solver.
///
/// `split = Some((h0, a))` additionally checks `|Au|^2 <= -u'H0u - 2M(u)`,
/// which holds whenever `H = H0 + A'A`.
pub fn verify_tr(
    h: &Matrix,
    g: &Vector,
    r: f64,
    sol: &TrustRegionSolution,
    split: Option<(&Matrix, &Matrix)>,
) -> TrVerification {
    let n = g.len();
    let u = &sol.u;
    let un = u.norm();
    let shifted = h + Matrix::identity(n, n) * sol.delta;
    let model = quadratic(h, g, u);
    TrVerification {
        norm_excess: (un - r).max(0.0),
        complementarity: (sol.delta * (un - r)).abs(),
        stationarity: (&shifted * u + g).norm(),
        dual_psd: (-min_eigenvalue(&shifted)).max(0.0),
        negative_delta: (-sol.delta).max(0.0),
        model_mismatch: (sol.model_value - model).abs(),
        model_excess: (sol.model_value + sol.delta * r * r / 2.0)
            .max(sol.model_value)
            .max(0.0),
        split_excess: split.map(|(h0, a)| {
            let au = a * u;
            (au.norm_squared() + u.dot(&(h0 * u)) + 2.0 * model).max(0.0)
        }),
    }
}

/// Checks the solver contract with the usual scale-aware tolerances.
pub fn satisfies_contract(h: &Matrix, g: &Vector, r: f64, sol: &TrustRegionSolution) -> bool {
    let v = verify_tr(h, g, r, sol, None);
    let hn = sym_norm2(h).max(1.0);
    sol.u.norm() <= r * (1.0 + 1e-9)
        && v.complementarity <= 1e-8 * r.max(sol.delta).max(1.0)
        && v.stationarity <= 1e-8 * g.norm().max(1.0)
        && v.dual_psd <= 1e-8 * hn
        && v.negative_delta == 0.0
        && sol.model_value <= 0.0
        && v.model_excess <= 1e-8
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(d))
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn boundary_identity() {
        let h = Matrix::identity(2, 2);
        let g = v(&[-1.0, 0.0]);
        let sol = solve_trust_region(&h, &g, 0.5, DEFAULT_TOL).unwrap();
        assert_relative_eq!(sol.u, v(&[0.5, 0.0]), epsilon = 1e-10);
        assert_relative_eq!(sol.delta, 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.model_value, -0.375, epsilon = 1e-10);
        assert!(sol.on_boundary && !sol.hard_case);
        assert!(satisfies_contract(&h, &g, 0.5, &sol));
    }

    #[test]
    fn interior_identity() {
        let h = Matrix::identity(2, 2);
        let g = v(&[-0.2, 0.0]);
        let sol = solve_trust_region(&h, &g, 1.0, DEFAULT_TOL).unwrap();
        assert_relative_eq!(sol.u, v(&[0.2, 0.0]), epsilon = 1e-14);
        assert_eq!(sol.delta, 0.0);
        assert!(!sol.on_boundary);
    }

    #[test]
    fn hard_case_indefinite() {
        let h = diag(&[-1.0, 1.0]);
        let g = v(&[0.0, 0.0]);
        let sol = solve_trust_region(&h, &g, 1.0, DEFAULT_TOL).unwrap();
        assert!(sol.hard_case);
        assert_eq!(sol.delta, 1.0);
        assert_relative_eq!(sol.u[0].abs(), 1.0, epsilon = 1e-14);
        assert!(sol.u[0] > 0.0);
        assert_relative_eq!(sol.model_value, -0.5, epsilon = 1e-14);
        assert!(satisfies_contract(&h, &g, 1.0, &sol));
    }

    #[test]
    fn hard_case_with_gradient_off_bottom_space() {
        let h = diag(&[-2.0, 1.0]);
        let g = v(&[0.0, -0.3]);
        let sol = solve_trust_region(&h, &g, 1.0, DEFAULT_TOL).unwrap();
        assert!(sol.hard_case);
        // u_2 = 0.3 / (1 + 2) = 0.1 and the rest of the radius goes to e_1.
        assert_relative_eq!(sol.u[1], 0.1, epsilon = 1e-14);
        assert_relative_eq!(sol.u[0], (1.0f64 - 0.01).sqrt(), epsilon = 1e-14);
        assert!(satisfies_contract(&h, &g, 1.0, &sol));
    }

    #[test]
    fn psd_singular_interior() {
        let h = diag(&[0.0, 2.0]);
        let g = v(&[0.0, -1.0]);
        let sol = solve_trust_region(&h, &g, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(sol.delta, 0.0);
        assert_relative_eq!(sol.u, v(&[0.0, 0.5]), epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let h = Matrix::identity(2, 2);
        assert!(solve_trust_region(&h, &v(&[1.0, 0.0]), 0.0, DEFAULT_TOL).is_err());
        assert!(solve_trust_region(&h, &v(&[f64::NAN, 0.0]), 1.0, DEFAULT_TOL).is_err());
        assert!(solve_trust_region(&h, &v(&[1.0]), 1.0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn verification_flags_perturbation() {
        let h = Matrix::identity(2, 2);
        let g = v(&[-1.0, 0.0]);
        let mut sol = solve_trust_region(&h, &g, 0.5, DEFAULT_TOL).unwrap();
        assert!(verify_tr(&h, &g, 0.5, &sol, None).max_residual() <= 1e-8);
        sol.u += v(&[0.0, 1e-3]);
        assert!(verify_tr(&h, &g, 0.5, &sol, None).stationarity > 1e-4);
    }

    #[test]
    fn split_inequality_example() {
        let h = Matrix::identity(2, 2);
        let g = v(&[-1.0, 0.0]);
        let sol = solve_trust_region(&h, &g, 0.5, DEFAULT_TOL).unwrap();
        let h0 = Matrix::zeros(2, 2);
        let a = Matrix::identity(2, 2);
        let ver = verify_tr(&h, &g, 0.5, &sol, Some((&h0, &a)));
        assert_eq!(ver.split_excess, Some(0.0));
        // |u|^2 = 0.25 against -2 M(u) = 0.75.
        assert_relative_eq!(-2.0 * sol.model_value, 0.75, epsilon = 1e-10);
    }
}

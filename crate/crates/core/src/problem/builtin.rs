//! Registry of small dense test problems.

use std::collections::BTreeMap;

use super::{LipschitzConstants, ProblemOracle};
use crate::error::{Error, Result};
use crate::linalg::sym_norm2;
use crate::{Matrix, Vector};

/// Scalar parameters keyed by name, as read from a JSON parameter object.
pub type ProblemParams = BTreeMap<String, f64>;

pub const BUILTIN_NAMES: [&str; 5] = [
    "lp1d",
    "box_qp_nonconvex",
    "annulus",
    "circle_lp_convex",
    "infeasible_1d",
];

/// Builds a registry problem by name.
///
/// Every entry accepts `L0`, `L1`, `L2` overrides for its Lipschitz
/// constants. Entry-specific keys:
///
/// | name               | keys (defaults)                                                    |
/// |--------------------|--------------------------------------------------------------------|
/// | `lp1d`             | none                                                               |
/// | `box_qp_nonconvex` | `n` (2), `curvature` (1), `coupling` (0.25), `linear` (0.2), `half_width` (1) |
/// | `annulus`          | `c1` (1), `c2` (0), `inner` (1), `outer` (2)                        |
/// | `circle_lp_convex` | `c1` (1), `c2` (0.5), `radius` (1), `cx` (0), `cy` (0)              |
/// | `infeasible_1d`    | none                                                               |
pub fn builtin_problem(name: &str, params: &ProblemParams) -> Result<Box<dyn ProblemOracle>> {
    let mut reader = ParamReader::new(params);
    let problem: Box<dyn ProblemOracle> = match name {
        "lp1d" => {
            let lip = reader.lipschitz(1.0, 1.0, 1.0)?;
            Box::new(Lp1d { lip })
        }
        "box_qp_nonconvex" => Box::new(BoxQp::from_params(&mut reader)?),
        "annulus" => Box::new(Annulus::from_params(&mut reader)?),
        "circle_lp_convex" => Box::new(CircleLp::from_params(&mut reader)?),
        "infeasible_1d" => {
            let lip = reader.lipschitz(1.0, 1.0, 1.0)?;
            Box::new(Infeasible1d { lip })
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    reader.finish(name)?;
    Ok(problem)
}

struct ParamReader<'a> {
    params: &'a ProblemParams,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a ProblemParams) -> Self {
        Self {
            params,
            used: Vec::new(),
        }
    }

    fn get(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.used.push(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(v) if v.is_finite() => Ok(*v),
            Some(v) => Err(Error::BadParams(format!("`{key}` must be finite, got {v}"))),
        }
    }

    fn lipschitz(&mut self, l0: f64, l1: f64, l2: f64) -> Result<LipschitzConstants> {
        let l0 = self.get("L0", l0)?;
        let l1 = self.get("L1", l1)?;
        let l2 = self.get("L2", l2)?;
        LipschitzConstants::new(l0, l1, l2).map_err(|e| Error::BadParams(e.to_string()))
    }

    fn finish(&self, name: &str) -> Result<()> {
        match self
            .params
            .keys()
            .find(|k| !self.used.contains(&k.as_str()))
        {
            Some(k) => Err(Error::BadParams(format!(
                "`{name}` does not accept parameter `{k}`"
            ))),
            None => Ok(()),
        }
    }
}

fn dense(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, data)
}

/// `min x  s.t.  x >= 0, 2 - x >= 0`.
#[derive(Debug, Clone)]
pub struct Lp1d {
    pub lip: LipschitzConstants,
}

impl ProblemOracle for Lp1d {
    fn n(&self) -> usize {
        1
    }
    fn m(&self) -> usize {
        2
    }
    fn f(&self, x: &Vector) -> f64 {
        x[0]
    }
    fn grad_f(&self, _x: &Vector) -> Vector {
        Vector::from_element(1, 1.0)
    }
    fn hess_f(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(1, 1)
    }
    fn a(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![x[0], 2.0 - x[0]])
    }
    fn jac_a(&self, _x: &Vector) -> Matrix {
        dense(2, 1, &[1.0, -1.0])
    }
    fn hess_a(&self, _x: &Vector, _i: usize) -> Matrix {
        Matrix::zeros(1, 1)
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

/// `min x  s.t.  x - 1 >= 0, -x - 1 >= 0` (empty feasible set).
#[derive(Debug, Clone)]
pub struct Infeasible1d {
    pub lip: LipschitzConstants,
}

impl ProblemOracle for Infeasible1d {
    fn n(&self) -> usize {
        1
    }
    fn m(&self) -> usize {
        2
    }
    fn f(&self, x: &Vector) -> f64 {
        x[0]
    }
    fn grad_f(&self, _x: &Vector) -> Vector {
        Vector::from_element(1, 1.0)
    }
    fn hess_f(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(1, 1)
    }
    fn a(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![x[0] - 1.0, -x[0] - 1.0])
    }
    fn jac_a(&self, _x: &Vector) -> Matrix {
        dense(2, 1, &[1.0, -1.0])
    }
    fn hess_a(&self, _x: &Vector, _i: usize) -> Matrix {
        Matrix::zeros(1, 1)
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

/// Indefinite quadratic `0.5 x'Qx + c'x` over the box `|x_i| <= half_width`.
///
/// `Q` is tridiagonal with diagonal `(1, -curvature, 1, -curvature, ...)` and
/// off-diagonal `coupling`; `c_i = linear`. Constraints are ordered
/// `(hw + x_0, hw - x_0, hw + x_1, hw - x_1, ...)`.
#[derive(Debug, Clone)]
pub struct BoxQp {
    pub q: Matrix,
    pub c: Vector,
    pub half_width: f64,
    pub lip: LipschitzConstants,
}

impl BoxQp {
    fn from_params(reader: &mut ParamReader<'_>) -> Result<Self> {
        let n_raw = reader.get("n", 2.0)?;
        if !(1.0..=50.0).contains(&n_raw) || n_raw.fract() != 0.0 {
            return Err(Error::BadParams(format!(
                "`n` must be an integer in [1, 50], got {n_raw}"
            )));
        }
        let n = n_raw as usize;
        let curvature = reader.get("curvature", 1.0)?;
        let coupling = reader.get("coupling", 0.25)?;
        let linear = reader.get("linear", 0.2)?;
        let half_width = reader.get("half_width", 1.0)?;
        if !(half_width > 0.0) {
            return Err(Error::BadParams(format!(
                "`half_width` must be > 0, got {half_width}"
            )));
        }
        let mut q = Matrix::zeros(n, n);
        for i in 0..n {
            q[(i, i)] = if i % 2 == 0 { 1.0 } else { -curvature };
            if i + 1 < n {
                q[(i, i + 1)] = coupling;
                q[(i + 1, i)] = coupling;
            }
        }
        let c = Vector::from_element(n, linear);
        let qn = sym_norm2(&q);
        let l1 = if qn > 0.0 { qn } else { 1.0 };
        let l0 = (qn * half_width * (n as f64).sqrt() + c.norm()).max(1.0);
        let lip = reader.lipschitz(l0, l1, 1.0)?;
        Ok(Self {
            q,
            c,
            half_width,
            lip,
        })
    }

    /// Builds the problem directly from a symmetric `Q` and `c`.
    pub fn new(q: Matrix, c: Vector, half_width: f64, lip: LipschitzConstants) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() != c.len() || c.is_empty() {
            return Err(Error::BadParams(format!(
                "Q is {}x{} but c has length {}",
                q.nrows(),
                q.ncols(),
                c.len()
            )));
        }
        if (&q - q.transpose()).amax() > 1e-12 {
            return Err(Error::BadParams("Q must be symmetric".into()));
        }
        if !(half_width > 0.0) {
            return Err(Error::BadParams("half_width must be > 0".into()));
        }
        Ok(Self {
            q,
            c,
            half_width,
            lip,
        })
    }
}

impl ProblemOracle for BoxQp {
    fn n(&self) -> usize {
        self.c.len()
    }
    fn m(&self) -> usize {
        2 * self.c.len()
    }
    fn f(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }
    fn grad_f(&self, x: &Vector) -> Vector {
        &self.q * x + &self.c
    }
    fn hess_f(&self, _x: &Vector) -> Matrix {
        self.q.clone()
    }
    fn a(&self, x: &Vector) -> Vector {
        let hw = self.half_width;
        Vector::from_iterator(self.m(), x.iter().flat_map(|xi| [hw + xi, hw - xi]))
    }
    fn jac_a(&self, _x: &Vector) -> Matrix {
        let n = self.n();
        let mut j = Matrix::zeros(2 * n, n);
        for i in 0..n {
            j[(2 * i, i)] = 1.0;
            j[(2 * i + 1, i)] = -1.0;
        }
        j
    }
    fn hess_a(&self, _x: &Vector, _i: usize) -> Matrix {
        Matrix::zeros(self.n(), self.n())
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

/// Linear objective `c'x` on the annulus `inner^2 <= |x|^2 <= outer^2`.
#[derive(Debug, Clone)]
pub struct Annulus {
    pub c: Vector,
    pub inner: f64,
    pub outer: f64,
    pub lip: LipschitzConstants,
}

impl Annulus {
    fn from_params(reader: &mut ParamReader<'_>) -> Result<Self> {
        let c = Vector::from_vec(vec![reader.get("c1", 1.0)?, reader.get("c2", 0.0)?]);
        let inner = reader.get("inner", 1.0)?;
        let outer = reader.get("outer", 2.0)?;
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::BadParams(format!(
                "annulus needs 0 < inner < outer, got inner = {inner}, outer = {outer}"
            )));
        }
        let lip = reader.lipschitz(c.norm().max(2.0 * outer), 2.0, 1.0)?;
        Ok(Self {
            c,
            inner,
            outer,
            lip,
        })
    }
}

impl ProblemOracle for Annulus {
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        2
    }
    fn f(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }
    fn grad_f(&self, _x: &Vector) -> Vector {
        self.c.clone()
    }
    fn hess_f(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(2, 2)
    }
    fn a(&self, x: &Vector) -> Vector {
        let r2 = x.norm_squared();
        Vector::from_vec(vec![
            r2 - self.inner * self.inner,
            self.outer * self.outer - r2,
        ])
    }
    fn jac_a(&self, x: &Vector) -> Matrix {
        dense(2, 2, &[2.0 * x[0], 2.0 * x[1], -2.0 * x[0], -2.0 * x[1]])
    }
    fn hess_a(&self, _x: &Vector, i: usize) -> Matrix {
        let s = if i == 0 { 2.0 } else { -2.0 };
        Matrix::identity(2, 2) * s
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

/// Linear objective `c'x` over the disk `|x - center| <= radius`.
#[derive(Debug, Clone)]
pub struct CircleLp {
    pub c: Vector,
    pub center: Vector,
    pub radius: f64,
    pub lip: LipschitzConstants,
}

impl CircleLp {
    fn from_params(reader: &mut ParamReader<'_>) -> Result<Self> {
        let c = Vector::from_vec(vec![reader.get("c1", 1.0)?, reader.get("c2", 0.5)?]);
        let radius = reader.get("radius", 1.0)?;
        let center = Vector::from_vec(vec![reader.get("cx", 0.0)?, reader.get("cy", 0.0)?]);
        if !(radius > 0.0) {
            return Err(Error::BadParams(format!(
                "`radius` must be > 0, got {radius}"
            )));
        }
        let lip = reader.lipschitz(c.norm().max(2.0 * radius), 2.0, 1.0)?;
        Ok(Self {
            c,
            center,
            radius,
            lip,
        })
    }

    /// `inf f` over the disk: `c'center - radius * |c|`.
    pub fn optimal_value(&self) -> f64 {
        self.c.dot(&self.center) - self.radius * self.c.norm()
    }

    pub fn optimal_point(&self) -> Vector {
        let cn = self.c.norm();
        if cn == 0.0 {
            return self.center.clone();
        }
        &self.center - &self.c * (self.radius / cn)
    }
}

impl ProblemOracle for CircleLp {
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        1
    }
    fn f(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }
    fn grad_f(&self, _x: &Vector) -> Vector {
        self.c.clone()
    }
    fn hess_f(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(2, 2)
    }
    fn a(&self, x: &Vector) -> Vector {
        Vector::from_element(
            1,
            self.radius * self.radius - (x - &self.center).norm_squared(),
        )
    }
    fn jac_a(&self, x: &Vector) -> Matrix {
        let d = x - &self.center;
        dense(1, 2, &[-2.0 * d[0], -2.0 * d[1]])
    }
    fn hess_a(&self, _x: &Vector, _i: usize) -> Matrix {
        Matrix::identity(2, 2) * -2.0
    }
    fn lipschitz(&self) -> LipschitzConstants {
        self.lip
    }
}

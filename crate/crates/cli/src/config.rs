//! JSON run configuration and per-solver parameter parsing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};
use tripm::ipm::{Mode, MAX_ITERS_CAP};
use tripm::{AnnealConfig, TwoPhaseConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trace_path: Option<PathBuf>,
    pub cert_path: Option<PathBuf>,
    /// Append `x_0 .. x_{n-1}` to every trace row.
    #[serde(default = "default_x_columns")]
    pub x_columns: bool,
}

fn default_x_columns() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trace_path: None,
            cert_path: None,
            x_columns: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    TrustIpm,
    Annealed,
    TwoPhase,
    GdFixed,
    GdAdaptive,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::TrustIpm => "trust_ipm",
            SolverKind::Annealed => "annealed",
            SolverKind::TwoPhase => "two_phase",
            SolverKind::GdFixed => "gd_fixed",
            SolverKind::GdAdaptive => "gd_adaptive",
        }
    }

    /// Every `solver_params` key the solver understands.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            SolverKind::TrustIpm => &["mu", "tau_l", "mode", "max_iters"],
            SolverKind::Annealed => &[
                "mu",
                "tau_l",
                "eps",
                "radius",
                "max_outer",
                "zeta",
                "max_iters",
            ],
            SolverKind::TwoPhase => &["eps_opt", "eps_inf", "L0", "L1", "max_iters"],
            SolverKind::GdFixed => &["mu", "alpha", "tau_l", "max_iters"],
            SolverKind::GdAdaptive => &["mu", "tau_l", "max_iters"],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    #[serde(default)]
    pub solver_params: Map<String, Value>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Relative output paths are resolved against this directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg =
            Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn set_param(&mut self, key: &str, value: f64) {
        self.solver_params
            .insert(key.to_string(), Value::from(value));
    }

    pub fn set_count(&mut self, key: &str, value: usize) {
        self.solver_params
            .insert(key.to_string(), Value::from(value));
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Sends both output files into `dir`, keeping configured file names.
    pub fn redirect_output(&mut self, dir: &Path) {
        let name = |p: &Option<PathBuf>, default: &str| {
            p.as_ref()
                .and_then(|p| p.file_name())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(default))
        };
        let trace = name(&self.output.trace_path, "trace.csv");
        let cert = name(&self.output.cert_path, "certificate.json");
        let dir = std::path::absolute(dir).unwrap_or_else(|_| dir.to_path_buf());
        self.output.trace_path = Some(dir.join(trace));
        self.output.cert_path = Some(dir.join(cert));
    }

    pub fn solver_spec(&self) -> Result<SolverSpec, CliError> {
        let r = Reader {
            map: &self.solver_params,
            solver: self.solver,
        };
        r.check_keys()?;
        let max_iters = r.count("max_iters", MAX_ITERS_CAP)?;
        Ok(match self.solver {
            SolverKind::TrustIpm => SolverSpec::TrustIpm {
                mu: r.req("mu")?,
                tau_l: r.req("tau_l")?,
                mode: r.mode()?,
                max_iters,
            },
            SolverKind::Annealed => SolverSpec::Annealed {
                cfg: AnnealConfig {
                    mu0: r.req("mu")?,
                    eps: r.req("eps")?,
                    radius: r.req("radius")?,
                    tau_l: r.req("tau_l")?,
                    max_outer: r.count("max_outer", 100)?,
                    zeta: r.opt("zeta")?,
                },
                max_iters,
            },
            SolverKind::TwoPhase => SolverSpec::TwoPhase(TwoPhaseConfig {
                l0: r.opt("L0")?,
                l1: r.opt("L1")?,
                max_iters,
                ..TwoPhaseConfig::new(r.req("eps_opt")?, r.req("eps_inf")?)
            }),
            SolverKind::GdFixed => SolverSpec::GdFixed {
                mu: r.req("mu")?,
                alpha: r.req("alpha")?,
                tau_l: r.req("tau_l")?,
                max_iters,
            },
            SolverKind::GdAdaptive => SolverSpec::GdAdaptive {
                mu: r.req("mu")?,
                tau_l: r.req("tau_l")?,
                max_iters,
            },
        })
    }
}

/// Solver parameters after validation against the chosen solver.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    TrustIpm {
        mu: f64,
        tau_l: f64,
        mode: Mode,
        max_iters: usize,
    },
    Annealed {
        cfg: AnnealConfig,
        /// Cap on each inner solve.
        max_iters: usize,
    },
    TwoPhase(TwoPhaseConfig),
    GdFixed {
        mu: f64,
        alpha: f64,
        tau_l: f64,
        max_iters: usize,
    },
    GdAdaptive {
        mu: f64,
        tau_l: f64,
        max_iters: usize,
    },
}

struct Reader<'a> {
    map: &'a Map<String, Value>,
    solver: SolverKind,
}

impl Reader<'_> {
    fn check_keys(&self) -> Result<(), CliError> {
        let known = self.solver.keys();
        match self.map.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "unknown solver_params key `{k}` for solver {} (expected one of {})",
                self.solver.name(),
                known.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                CliError::Config(format!(
                    "solver_params key `{key}` must be a number, got {v}"
                ))
            }),
        }
    }

    fn req(&self, key: &str) -> Result<f64, CliError> {
        self.opt(key)?.ok_or_else(|| {
            CliError::Config(format!(
                "missing solver_params key `{key}` (required by solver {})",
                self.solver.name()
            ))
        })
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.opt(key)? {
            None => Ok(default),
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= usize::MAX as f64 => Ok(v as usize),
            Some(v) => Err(CliError::Config(format!(
                "solver_params key `{key}` must be a positive integer, got {v}"
            ))),
        }
    }

    fn mode(&self) -> Result<Mode, CliError> {
        match self.map.get("mode") {
            None => Ok(Mode::Nonconvex),
            Some(Value::String(s)) => s
                .parse()
                .map_err(|e| CliError::Config(format!("solver_params key `mode`: {e}"))),
            Some(v) => Err(CliError::Config(format!(
                "solver_params key `mode` must be a string, got {v}"
            ))),
        }
    }
}

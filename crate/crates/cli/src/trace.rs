//! Trace CSV output. Floats use `{}` formatting, which is the shortest
//! decimal that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tripm::annealing::OuterRecord;
use tripm::gd::GdRecord;
use tripm::IterateRecord;

pub const COLUMNS: [&str; 12] = [
    "k",
    "psi",
    "grad_norm",
    "min_slack",
    "y_norm1",
    "r",
    "alpha",
    "delta",
    "model",
    "s_ratio",
    "fj1",
    "fj2",
];

/// One trace row; columns a solver does not produce are left empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub psi: f64,
    pub grad_norm: f64,
    pub min_slack: f64,
    pub y_norm1: f64,
    pub r: Option<f64>,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub model: Option<f64>,
    pub s_ratio: Option<f64>,
    pub fj1: Option<bool>,
    pub fj2: Option<bool>,
    pub x: Vec<f64>,
}

impl From<&IterateRecord> for TraceRow {
    fn from(r: &IterateRecord) -> Self {
        Self {
            k: r.k,
            psi: r.psi,
            grad_norm: r.grad_norm,
            min_slack: r.min_slack,
            y_norm1: r.y_norm1,
            r: Some(r.r),
            alpha: r.alpha,
            delta: Some(r.delta),
            model: Some(r.model),
            s_ratio: Some(r.s_ratio),
            fj1: Some(r.fj1),
            fj2: Some(r.fj2),
            x: r.x.clone(),
        }
    }
}

impl From<&GdRecord> for TraceRow {
    fn from(r: &GdRecord) -> Self {
        Self {
            k: r.k,
            psi: r.psi,
            grad_norm: r.grad_norm,
            min_slack: r.min_slack,
            y_norm1: r.y_norm1,
            r: None,
            alpha: r.alpha,
            delta: None,
            model: None,
            s_ratio: None,
            fj1: None,
            fj2: None,
            x: r.x.clone(),
        }
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders the CSV; with `n = Some(_)` the columns `x_0 .. x_{n-1}` follow.
pub fn render(rows: &[TraceRow], n: Option<usize>) -> String {
    let mut out = COLUMNS.join(",");
    if let Some(n) = n {
        for j in 0..n {
            let _ = write!(out, ",x_{j}");
        }
    }
    out.push('\n');
    for r in rows {
        let cells = [
            r.k.to_string(),
            r.psi.to_string(),
            r.grad_norm.to_string(),
            r.min_slack.to_string(),
            r.y_norm1.to_string(),
            opt(r.r),
            r.alpha.to_string(),
            opt(r.delta),
            opt(r.model),
            opt(r.s_ratio),
            opt(r.fj1),
            opt(r.fj2),
        ];
        out.push_str(&cells.join(","));
        if n.is_some() {
            for v in &r.x {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, rows: &[TraceRow], n: Option<usize>) -> std::io::Result<()> {
    ensure_parent(path)?;
    fs::write(path, render(rows, n))
}

pub fn write_outer(path: &Path, outer: &[OuterRecord]) -> std::io::Result<()> {
    let mut out = String::from("j,mu,inner_iterations,f,lag_norm,comp_err,y_norm1,dual_bound_ok\n");
    for o in outer {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            o.j,
            o.mu,
            o.inner_iterations,
            o.f,
            o.lag_norm,
            o.comp_err,
            o.y_norm1,
            opt(o.dual_bound_ok)
        );
    }
    ensure_parent(path)?;
    fs::write(path, out)
}

pub fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => fs::create_dir_all(d),
        _ => Ok(()),
    }
}

/// `dir/stem<suffix>.ext` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}{suffix}.{ext}"),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

//! One solve per parameter value, run in parallel, with a CSV summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{execute, write_outputs, RunOutput};
use crate::trace;

pub const SUMMARY_COLUMNS: &str = "value,status,iterations,kind,psi,grad_norm,min_slack,y_norm1,\
                                   wall_time_s,iteration_bound,within_bound";

pub fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad sweep value `{s}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    Ok(values)
}

struct Point {
    value: f64,
    result: Result<RunOutput, CliError>,
    seconds: f64,
}

fn indexed(path: &Option<PathBuf>, i: usize) -> Option<PathBuf> {
    path.as_ref().map(|p| trace::sibling(p, &format!("_{i}")))
}

fn run_point(base: &RunConfig, param: &str, value: f64, i: usize) -> Point {
    let mut cfg = base.clone();
    cfg.set_param(param, value);
    cfg.output.trace_path = indexed(&base.output.trace_path, i);
    cfg.output.cert_path = indexed(&base.output.cert_path, i);
    let start = Instant::now();
    let result = execute(&cfg).and_then(|out| write_outputs(&cfg, &out).map(|()| out));
    Point {
        value,
        result,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn summary_row(pt: &Point) -> String {
    let mut s = String::new();
    match &pt.result {
        Ok(out) => {
            let last = out
                .trace
                .last()
                .or(out.phase_one.as_ref().and_then(|r| r.last()));
            let cell =
                |f: fn(&trace::TraceRow) -> f64| last.map(|r| f(r).to_string()).unwrap_or_default();
            let iterations = out.iterations();
            let _ = write!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                pt.value,
                out.status.label(),
                iterations,
                out.kind.clone().unwrap_or_default(),
                cell(|r| r.psi),
                cell(|r| r.grad_norm),
                cell(|r| r.min_slack),
                cell(|r| r.y_norm1),
                pt.seconds,
                out.iteration_bound
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
                out.iteration_bound
                    .map(|b| (iterations as f64 <= b).to_string())
                    .unwrap_or_default(),
            );
        }
        Err(_) => {
            let _ = write!(s, "{},error,,,,,,,{},,", pt.value, pt.seconds);
        }
    }
    s
}

/// Runs the sweep and returns the process exit code: 0 when every point
/// produced an outcome, otherwise the code of the first failing point.
pub fn sweep(
    base: &RunConfig,
    param: &str,
    values: &[f64],
    summary: Option<&Path>,
) -> Result<i32, CliError> {
    if !base.solver.keys().contains(&param) {
        return Err(CliError::Config(format!(
            "`{param}` is not a solver_params key for solver {} (expected one of {})",
            base.solver.name(),
            base.solver.keys().join(", ")
        )));
    }
    let points: Vec<Point> = thread::scope(|s| {
        let handles: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| s.spawn(move || run_point(base, param, v, i)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut text = String::from(SUMMARY_COLUMNS);
    text.push('\n');
    let mut code = 0;
    for (i, pt) in points.iter().enumerate() {
        text.push_str(&summary_row(pt));
        text.push('\n');
        if let Err(e) = &pt.result {
            eprintln!("run {i} ({param} = {}): {e}", pt.value);
            if code == 0 {
                code = e.exit_code();
            }
        }
    }
    match summary {
        Some(path) => {
            trace::ensure_parent(path)?;
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(code)
}

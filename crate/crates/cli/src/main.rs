//! `tripm`: run the trust-region barrier solvers from JSON configs.
//!
//! Exit codes: 0 certified, 1 config error, 2 iteration cap (or gradient
//! descent leaving the feasible region), 3 verification or numerical failure.

mod config;
mod error;
mod run;
mod sweep;
mod trace;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tripm::{builtin_problem, check_derivatives, Vector};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "tripm",
    version,
    about = "Trust-region log-barrier interior point solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver described by a config file.
    Solve {
        config: PathBuf,
        /// Override `solver_params.mu`.
        #[arg(long)]
        mu: Option<f64>,
        /// Override `solver_params.max_iters`.
        #[arg(long)]
        max_iters: Option<usize>,
        /// Write the trace and certificate into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve once per value of one solver parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Directory for per-run traces and certificates.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary CSV path; stdout when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Compare analytic derivatives with central differences at `x0`.
    CheckDerivs {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn solve(
    path: &Path,
    mu: Option<f64>,
    max_iters: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(mu) = mu {
        cfg.set_param("mu", mu);
    }
    if let Some(n) = max_iters {
        cfg.set_count("max_iters", n);
    }
    if let Some(dir) = out_dir {
        cfg.redirect_output(dir);
    }
    let out = run::execute(&cfg)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    run::write_outputs(&cfg, &out)?;
    let kind = out.kind.as_deref().unwrap_or("none");
    println!(
        "{} after {} iterations (certificate: {kind})",
        out.status.label(),
        out.iterations()
    );
    match &out.status {
        run::Status::VerificationFailed(m) => eprintln!("certificate does not verify: {m}"),
        run::Status::IterationLimit => eprintln!("iteration limit reached"),
        run::Status::LeftFeasibleRegion { k } => {
            eprintln!("step {k} left the feasible region")
        }
        run::Status::Certified => {}
    }
    Ok(out.status.exit_code())
}

fn check_derivs(path: &Path, tol: f64) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let p = builtin_problem(&cfg.problem.name, &cfg.problem.params)?;
    if cfg.x0.len() != p.n() {
        return Err(CliError::Config(format!(
            "x0 has length {} but the problem has n = {}",
            cfg.x0.len(),
            p.n()
        )));
    }
    let report = check_derivatives(p.as_ref(), &Vector::from_column_slice(&cfg.x0), tol)?;
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Solver(e.to_string()))?;
    println!("{text}");
    Ok(if report.pass { 0 } else { 3 })
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve {
            config,
            mu,
            max_iters,
            out,
        } => solve(&config, mu, max_iters, out.as_deref()),
        Command::Sweep {
            config,
            param,
            values,
            out,
            summary,
        } => {
            let values = sweep::parse_values(&values)?;
            let mut cfg = RunConfig::load(&config)?;
            if let Some(dir) = &out {
                cfg.redirect_output(dir);
            }
            sweep::sweep(&cfg, &param, &values, summary.as_deref())
        }
        Command::CheckDerivs { config, tol } => check_derivs(&config, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

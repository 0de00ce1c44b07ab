use std::fmt;

/// Failure of a CLI command, mapped onto process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad config file, bad flag, unusable start point, or I/O trouble.
    Config(String),
    /// The solver failed numerically or produced something that does not verify.
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl From<tripm::Error> for CliError {
    fn from(e: tripm::Error) -> Self {
        use tripm::Error::*;
        match e {
            UnknownProblem(_) | BadParams(_) | InvalidArgument(_) | BoundaryViolation { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

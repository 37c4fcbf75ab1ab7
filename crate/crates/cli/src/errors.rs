//! Exit-code policy: 0 success, 1 I/O failure, 2 usage error, 3 domain
//! error (a parameter outside its validated range), 4 convergence failure.

use strqfi::{MetrologyError, OptimizeError, ResponseError};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Convergence(String),
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Domain(m)
            | CliError::Convergence(m)
            | CliError::Io(m) => m,
        }
    }
}

pub fn from_response(err: &ResponseError) -> CliError {
    match err {
        ResponseError::Convergence { .. } => CliError::Convergence(err.to_string()),
        ResponseError::Cache { .. } => CliError::Io(err.to_string()),
        _ => CliError::Domain(err.to_string()),
    }
}

pub fn from_metrology(err: &MetrologyError) -> CliError {
    match err {
        MetrologyError::Response(inner) => from_response(inner),
        _ => CliError::Domain(err.to_string()),
    }
}

pub fn from_optimize(err: OptimizeError) -> CliError {
    match err {
        OptimizeError::NoFiniteCell => CliError::Domain(err.to_string()),
        _ => CliError::Usage(err.to_string()),
    }
}

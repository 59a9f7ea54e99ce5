//! Command-line front end of the `qhnf` engine: problem files, the
//! `cokernel`, `normalize` and `verify` commands, and certificates.

pub mod certificate;
pub mod commands;
pub mod problem;

use std::path::Path;

pub use certificate::{Certificate, Status};
pub use commands::{cmd_cokernel, cmd_normalize, cmd_verify, Overrides};
pub use problem::{Pipeline, Problem, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
/// `normalize` succeeded and the reduced coefficient has `λ = 0`.
pub const EXIT_LAMBDA_ZERO: i32 = 10;
/// `normalize` succeeded and the form is integrable up to the truncation.
pub const EXIT_INTEGRABLE: i32 = 11;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("certificate: {0}")]
    Certificate(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Precondition(#[from] qhnf::Error),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub(crate) fn json(e: &serde_json::Error) -> Self {
        let text = e.to_string();
        let message = match text.rsplit_once(" at line ") {
            Some((m, _)) => m.to_string(),
            None => text,
        };
        CliError::Parse { line: e.line(), column: e.column(), message }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Certificate(_) | CliError::Io { .. } => EXIT_PARSE,
            CliError::Precondition(_) | CliError::Usage(_) => EXIT_PRECONDITION,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Reduced => EXIT_OK,
            Status::ReducedLambdaZero => EXIT_LAMBDA_ZERO,
            Status::Integrable => EXIT_INTEGRABLE,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Reads and parses a problem file; parse errors are prefixed with the path.
pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    Problem::parse(&read_file(path)?).map_err(|e| match e {
        CliError::Parse { line, column, message } => {
            CliError::Parse { line, column, message: format!("{message} (in {})", path.display()) }
        }
        other => other,
    })
}

pub fn load_certificate(path: &Path) -> Result<Certificate, CliError> {
    Certificate::parse(&read_file(path)?)
}

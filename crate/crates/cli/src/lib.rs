//! Command-line harness for `treediff`: the verification suite plus ad-hoc
//! norm, alpha, eigen, spectrum, matrix and DSL experiments.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::fmt;

pub use config::{Format, RunConfig};
pub use report::Report;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, unparsable input, missing files: exit 2.
    Usage(String),
    /// A verification assertion failed: exit 1.
    Assertion(String),
    /// Overflow, divergence, non-positive weights and similar: exit 3.
    Numeric(String),
}

impl CliError {
    /// Forces a library error into the usage class (for config parsing).
    pub fn usage(e: treediff::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<treediff::Error> for CliError {
    fn from(e: treediff::Error) -> Self {
        if e.is_numeric_domain() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Assertion(m) => write!(f, "assertion failed: {m}"),
            CliError::Numeric(m) => write!(f, "numeric domain error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

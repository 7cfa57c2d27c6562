//! Command-line harness for `esp-core`: system generators, particle and
//! result file formats, and the `eval`, `check` and `bench` commands.

pub mod commands;
pub mod generate;
pub mod io;
pub mod report;

use std::fmt;

pub use commands::{cmd_bench, cmd_check, cmd_eval, cmd_generate, RunConfig, SystemSource};
pub use generate::{generate_system, GeneratorKind, GeneratorSpec};
pub use report::{BenchReport, Summary};

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags or inputs (exit code 1).
    Usage(String),
    /// Plan construction, evaluation or certification failed (exit code 2).
    Numerical(String),
    /// Reading or writing files failed (exit code 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<esp_core::Error> for CliError {
    fn from(e: esp_core::Error) -> Self {
        use esp_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnsupportedPrecision(_) | E::LengthMismatch(..) => {
                Self::Usage(e.to_string())
            }
            _ => Self::Numerical(e.to_string()),
        }
    }
}

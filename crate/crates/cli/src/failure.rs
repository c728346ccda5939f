use std::fmt;
use std::path::Path;

use mirror_margin::Error;
use serde::Serialize;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// A failed stage of a command, with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(stage: &str, message: impl Into<String>) -> Self {
        Failure {
            stage: stage.into(),
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn numeric(stage: &str, message: impl Into<String>) -> Self {
        Failure {
            stage: stage.into(),
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }

    pub fn io(stage: &str, path: &Path, err: &std::io::Error) -> Self {
        Failure {
            stage: stage.into(),
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }

    /// Bad inputs and refused assumptions are validation failures; solver
    /// and convergence trouble is numeric.
    pub fn core(stage: &str, err: Error) -> Self {
        let code = match err {
            Error::DimensionMismatch { .. }
            | Error::Contract(_)
            | Error::Assumption(_)
            | Error::Infeasible(_)
            | Error::NotSeparable { .. }
            | Error::DegenerateShape { .. } => EXIT_VALIDATION,
            Error::Numeric { .. }
            | Error::LimitFailure { .. }
            | Error::Geometry { .. }
            | Error::NotConverged { .. }
            | Error::Unbounded
            | Error::Generation { .. }
            | Error::TrajectoryTooShort { .. } => EXIT_NUMERIC,
        };
        Failure {
            stage: stage.into(),
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for Failure {}

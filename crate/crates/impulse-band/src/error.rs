use impulse_band_core::ValidationReport;

use crate::config::ConfigError;
use crate::output::OutputError;
use crate::simulate::SimError;

/// Process exit codes.
pub const EXIT_INVALID_INPUT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("model violates its assumptions:\n{}", describe(.0))]
    Validation(ValidationReport),
    #[error("solver: {0}")]
    Solver(impulse_band_core::Error),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize, report: String },
}

fn describe(report: &ValidationReport) -> String {
    report.violations.iter().map(|v| format!("  {}: {}", v.assumption, v.detail)).collect::<Vec<_>>().join("\n")
}

impl From<impulse_band_core::Error> for AppError {
    fn from(e: impulse_band_core::Error) -> Self {
        match e {
            impulse_band_core::Error::InvalidInput(msg) => AppError::Invalid(msg.to_string()),
            other => AppError::Solver(other),
        }
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Invalid(_) | AppError::Io { .. } | AppError::Output(_) => {
                EXIT_INVALID_INPUT
            }
            AppError::Simulation(SimError::Tail(_)) => EXIT_SOLVER,
            AppError::Simulation(_) => EXIT_INVALID_INPUT,
            AppError::Validation(_) => EXIT_VALIDATION,
            AppError::Solver(_) => EXIT_SOLVER,
            AppError::ChecksFailed { .. } => EXIT_CHECK_FAILED,
        }
    }
}

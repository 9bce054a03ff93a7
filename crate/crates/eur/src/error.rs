use std::process::ExitCode;

use thiserror::Error;

/// Failures of a run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input files; nothing has been written.
    #[error("{0}")]
    Config(String),
    /// A computation failed (e.g. quadrature did not converge).
    #[error("numerical failure: {0}")]
    Numerical(#[from] eur_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub(crate) fn config(err: eur_core::Error) -> Self {
        Self::Config(err.to_string())
    }

    pub(crate) fn output(err: impl std::fmt::Display) -> Self {
        Self::Output(err.to_string())
    }

    /// 2 for configuration errors, 3 for numerical failures, 4 when output
    /// cannot be written.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Output(_) => 4,
        })
    }
}

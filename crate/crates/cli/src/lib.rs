//! Scenario parsing, commands and output formatting behind the `simo-ee` binary.

pub mod commands;
pub mod format;
pub mod scenario;

/// Failure classes, each mapped to a fixed process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("no allocation satisfies the constraints")]
    Infeasible,
    #[error("validation: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Infeasible => 2,
            CliError::Validation(_) => 3,
        }
    }
}

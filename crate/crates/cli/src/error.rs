use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] envelope_core::Error),

    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use envelope_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e {
                E::InvalidInput(_) | E::Domain { .. } | E::DegenerateLaw(_) => 2,
                E::NoConvergence { .. } => 3,
                E::NoBinding(_) | E::NoSolution(_) | E::NoBoundState(_) => 4,
            },
            CliError::Validation(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

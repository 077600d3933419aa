use ckc::CkcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<CkcError> for CliError {
    fn from(e: CkcError) -> Self {
        match e {
            CkcError::NotClosable { .. }
            | CkcError::InfeasiblePrefix { .. }
            | CkcError::InfeasibleDiagonals
            | CkcError::NoLongLinks
            | CkcError::ZeroBound(_)
            | CkcError::NegativeRadicand(..)
            | CkcError::PermutationTransport => CliError::Infeasible(e.to_string()),
            CkcError::NotSpherical { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

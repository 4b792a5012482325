use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    Missing(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Missing(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Verify(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<nonlocal_obstacle::Error> for CliError {
    fn from(e: nonlocal_obstacle::Error) -> Self {
        use nonlocal_obstacle::Error as E;
        match e {
            E::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            E::Degenerate(_) => CliError::Other(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Inputs that are well-formed but unusable together, e.g. tables of
    /// different lengths.
    #[error("{0}")]
    Usage(String),
    #[error("{}: {}", .0.name(), .0)]
    Runtime(#[from] tourlens::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(tourlens::Error::Io(e.to_string()))
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(#[from] psmet::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            // parameters that the model rejects came from the config
            Self::Config(_) | Self::Model(_) => 2,
            Self::Verification(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("scenario {scenario} failed: {source}")]
    Library {
        scenario: &'static str,
        #[source]
        source: ssmp_core::Error,
    },

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// Process exit status. 1 is reserved for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library { .. } => 3,
            CliError::Output { .. } => 4,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] dlab_core::Error),
    #[error("worker failure: {0}")]
    Worker(String),
}

impl HarnessError {
    /// Process exit status: 2 for anything that prevents the run from starting
    /// or the library rejected as a parameter, 1 for failures during execution.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Worker(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

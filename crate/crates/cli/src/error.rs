use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad command line or configuration; exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// A property or convergence check did not hold; exit code 1.
    #[error("check failed: {0}")]
    Failure(String),
    #[error(transparent)]
    Core(#[from] viscoshell::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Core(viscoshell::Error::Config(_)) => 2,
            HarnessError::Failure(_) | HarnessError::Core(_) => 1,
        }
    }
}

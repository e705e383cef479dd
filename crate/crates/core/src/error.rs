use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("all {0} attempts failed")]
    AllAttemptsFailed(usize),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Range(_) | Error::Dimension(_) | Error::Domain(_) | Error::Precondition(_) => 2,
            Error::NonConvergence(_) | Error::Invariant(_) | Error::AllAttemptsFailed(_) => 3,
            Error::Io(_) | Error::Parse(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(mimo_cnc::Error),

    #[error("setup error: {0}")]
    Setup(mimo_cnc::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl From<mimo_cnc::Error> for SimError {
    fn from(e: mimo_cnc::Error) -> Self {
        if e.is_numerical() {
            SimError::Numerical(e)
        } else {
            SimError::Setup(e)
        }
    }
}

impl SimError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures of a realization, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } | SimError::Setup(_) => 2,
            SimError::Numerical(_) => 3,
            _ => 1,
        }
    }
}

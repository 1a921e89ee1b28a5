use hess2_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    /// A numerical check or invariant failed, or the input was invalid.
    pub const FAILURE: i32 = 1;
    /// A theorem's hypothesis does not hold, so the check was skipped.
    pub const HYPOTHESIS: i32 = 2;
    pub const SOLVER: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Hypothesis(_)) => exit::HYPOTHESIS,
            CliError::Core(CoreError::Solver { .. }) => exit::SOLVER,
            _ => exit::FAILURE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map onto the CLI exit-code families: input, precondition and
/// numerical failures are "invariant" failures, hypothesis failures mean a
/// theorem does not apply, and solver failures come from the iterative solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular transform: |U'| = {0:e} is below the strict-monotonicity threshold")]
    SingularTransform(f64),

    #[error("value {value} outside the domain of transform {transform}")]
    TransformDomain { transform: String, value: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("source term error: {0}")]
    Source(String),

    #[error("solver failed: {reason} (history: {history:?})")]
    Solver { reason: String, history: Vec<f64> },

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("identity check failed: {what} (|gap| = {gap:e}, tolerance {tol:e})")]
    Identity { what: String, gap: f64, tol: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

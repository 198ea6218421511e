use thiserror::Error;

/// Failure modes shared by all numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The requested computation exceeds the configured memory budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// The operation does not apply in this regime; use a different path.
    #[error("mode error: {0}")]
    Mode(String),
    /// Invalid study or parameter configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// An iterative method failed or produced an unusable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A verification that should hold by construction did not.
    #[error("consistency failure: {0}")]
    Consistency(String),
    /// A linear program could not be solved.
    #[error("linear program: {0}")]
    Lp(#[from] crate::simplex::LpError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

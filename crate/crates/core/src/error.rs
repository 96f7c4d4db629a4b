use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// One or more parameter invariants failed. Each entry names one violation.
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A numeric routine was called outside its domain.
    #[error("{0}")]
    Domain(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("matrix is not positive semidefinite within tolerance")]
    NotPositiveSemidefinite,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A Monte Carlo trial failed; the whole run is aborted.
    #[error("trial {trial} failed: {source}")]
    Trial { trial: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than by a numeric failure.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Validation(_) | Error::Domain(_) | Error::Dimension(_) => true,
            Error::Trial { source, .. } => source.is_configuration(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

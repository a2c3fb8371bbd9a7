use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke a documented precondition (shapes, ordering, ranges).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid numeric parameter for a generator, schedule or estimator.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Problem data that fails a structural check, e.g. a non-monotone operator.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Iterative linear algebra that did not reach its tolerance.
    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    /// An iterate left the divergence guard.
    #[error("diverged at epoch {epoch}, inner step {inner}: |z| = {norm:e}")]
    Diverged { epoch: u64, inner: usize, norm: f64 },

    /// The averaged linear system has no solution.
    #[error("infeasible problem: residual {residual:e} of the min-norm solution")]
    Infeasible { residual: f64 },

    /// A step-size rule was requested whose precondition the problem does not meet.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// Experiment configuration errors, carrying the offending key path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

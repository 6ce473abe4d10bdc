//! Error taxonomy for the whole library.
//!
//! The classes matter to callers: `Config` means the input description is
//! unusable (the CLI maps it to exit code 2), `Hypothesis` means a structural
//! assumption of the continuum problem fails (e.g. a rational normal handed to
//! the half-space Neumann solver), and `Solver` carries the residual history
//! of a Krylov run that did not converge.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or self-inconsistent configuration. `path` is the field path
    /// inside the offending config structure when one is known.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Mismatched artifacts (wrong coefficient hash, wrong resolution, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A structural hypothesis of the continuum problem fails.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Iteration ran out before reaching the requested tolerance.
    #[error("solver stalled at relative residual {residual:.3e} after {iterations} iterations")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    /// An internal identity that must hold by construction failed numerically.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// Query outside the computed range (e.g. a reconstruction point deeper
    /// than the truncated half-space domain).
    #[error("out of range: {0}")]
    Range(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

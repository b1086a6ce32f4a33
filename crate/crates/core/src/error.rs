use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A branch with non-zero weight has an imaginary (or vanishing) frequency.
    #[error("breakup regime: branch {index:?} with epsilon = {epsilon} has no bound oscillation")]
    BreakupRegime { index: Option<usize>, epsilon: f64 },

    #[error("quadrature tolerance not met after {subdivisions} subdivisions (estimated error {est_error:e})")]
    ToleranceNotMet { subdivisions: usize, est_error: f64 },

    #[error("scenario error at `{key}`: {reason}")]
    Schema { key: String, reason: String },

    #[error("method `{method}` is incompatible with this scenario: {reason}")]
    IncompatibleMethod { method: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn schema(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema { key: key.into(), reason: reason.into() }
    }

    /// True for failures of the numerics rather than of the input document.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BreakupRegime { .. } | Error::ToleranceNotMet { .. })
    }
}

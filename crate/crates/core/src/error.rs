use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its domain.
    #[error("invalid argument `{name}`: {reason}")]
    Argument { name: String, reason: String },

    /// The requested evaluation needs something the profile was not built with.
    #[error("configuration error: {0}")]
    Config(String),

    /// A closed form was asked to evaluate a profile it does not solve.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("singular ansatz at tau = {tau:.6e}: {reason}")]
    SingularAnsatz { tau: f64, reason: String },

    #[error(
        "profile inconsistent with ansatz: detuning mismatch {mismatch:.3e} at t = {t:.6e} exceeds {tol:.1e}"
    )]
    InconsistentProfile { t: f64, mismatch: f64, tol: f64 },

    #[error("quadrature did not converge: estimate {estimate:.12e}, error bound {error:.3e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("step {step:.3e} does not resolve the fastest scale {scale:.3e}; use step <= {suggested:.1e}")]
    Resolution { step: f64, scale: f64, suggested: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Malformed structured input; `path` points at the offending field.
    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },
}

impl Error {
    pub(crate) fn argument(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Argument { name: name.into(), reason: reason.into() }
    }

    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), reason: reason.into() }
    }

    /// Usage and input errors as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Argument { .. } | Error::Config(_) | Error::Schema { .. } | Error::Precondition(_)
        )
    }
}

use thiserror::Error;

/// Errors raised by the numerical core and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// A model parameter set violates its invariants.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative or contour evaluation failed to reach its tolerance.
    #[error("convergence failure in {func}: {msg}")]
    Convergence { func: &'static str, msg: String },

    /// A linear system that should be solvable was numerically singular.
    #[error("singular system in {func}: {msg}")]
    Singular { func: &'static str, msg: String },

    /// A scenario configuration failed to parse or validate.
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        func,
        msg: msg.into(),
    }
}

pub(crate) fn parameter(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

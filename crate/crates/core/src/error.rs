use thiserror::Error;

/// Errors raised by the numerical pipeline and the scenario layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} > tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("finite-difference stencil did not converge: {0}")]
    Stencil(String),

    #[error("singular coherence system at delta_s = {delta_s:e}, delta_p = {delta_p:e}")]
    Singular { delta_s: f64, delta_p: f64 },

    #[error("step size underflow at t = {t:e} (h = {step:e})")]
    Stiffness { t: f64, step: f64 },

    #[error("non-finite state at t = {t:e}")]
    NonFinite { t: f64 },

    #[error("spectrum shape: {0}")]
    Shape(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("at {coordinate}: {source}")]
    AtGridPoint {
        coordinate: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Io(_) => true,
            Error::AtGridPoint { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

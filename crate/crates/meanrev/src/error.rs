use thiserror::Error;

/// Errors produced by model construction, quadrature, simulation and orchestration.
#[derive(Error, Debug)]
pub enum Error {
    #[error("malformed function: {name} returned a non-finite value at x = {at}")]
    MalformedFunction { name: String, at: f64 },

    #[error("coefficient channel `{channel}` must be strictly positive, got {value} at t = {t}")]
    Positivity { channel: String, value: f64, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("integral certified divergent: {0}")]
    DivergentIntegral(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scheme failure at step {step} (t = {t}): {reason}")]
    Scheme { step: usize, t: f64, reason: String },

    #[error("state blew up at step {step} (t = {t}): value {value}")]
    BlowUp { step: usize, t: f64, value: f64 },

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("window [{t}, {t_end}] extends beyond the horizon {horizon}")]
    WindowBeyondHorizon { t: f64, t_end: f64, horizon: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid scenario or grid parameters. `line` is 0 when the error does
    /// not come from a config document.
    #[error("configuration error (key `{key}`, line {line}): {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A caller broke an operation's precondition (grid mismatch, time
    /// mismatch, labels out of range, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The periodic window is too small for the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    /// Field magnitudes crossed the blow-up threshold. The last valid state
    /// is the one that was handed to the failing step.
    #[error("blow-up at t = {t}: max amplitude {max_abs:.3e} exceeds threshold {threshold:.3e}")]
    BlowUp { t: f64, max_abs: f64, threshold: f64 },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line: 0,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A run that stopped early. `partial` holds every snapshot recorded before
/// the failure.
#[derive(Debug, Clone, Error)]
#[error("run interrupted: {error}")]
pub struct Interrupted<P: std::fmt::Debug> {
    pub partial: P,
    pub error: Error,
}

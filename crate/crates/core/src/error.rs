use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown frequency unit `{0}` (expected one of Hz, kHz, MHz, GHz)")]
    UnknownUnit(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("reference impedance must be positive and finite, got {0}")]
    InvalidZ0(f64),

    #[error("singular conversion at frequency index {index}: {what}")]
    Singular { index: usize, what: &'static str },

    #[error("length mismatch: {left} vs {right} frequency points")]
    LengthMismatch { left: usize, right: usize },

    #[error("expected a {expected}-port network, got {got} ports")]
    PortMismatch { expected: usize, got: usize },

    #[error("unknown derived quantity `{0}` (expected one of re, im, mag, db, deg)")]
    UnknownQuantity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {0} outside the open unit interval")]
    OutsideUnitInterval(f64),

    #[error("model `{model}` has no field `{field}`")]
    UnknownField { model: String, field: String },

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),

    #[error("expected {expected} values, got {got}")]
    VectorLength { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("frequency {freq} Hz is outside the tabulated span [{lo}, {hi}] Hz")]
    OutsideSpan { freq: f64, lo: f64, hi: f64 },

    #[error("unknown {kind} `{token}`; valid: {valid}")]
    UnknownName {
        kind: &'static str,
        token: String,
        valid: String,
    },

    #[error("invalid fit setup: {0}")]
    InvalidFit(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn unknown_name(kind: &'static str, token: &str, valid: &[&str]) -> Self {
        Error::UnknownName {
            kind,
            token: token.to_string(),
            valid: valid.join(", "),
        }
    }
}

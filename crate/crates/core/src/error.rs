//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid anthropometry: {0}")]
    InvalidAnthropometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown frame `{0}`")]
    UnknownFrame(String),

    #[error("unknown joint `{0}`")]
    UnknownJoint(String),

    #[error("angle `{name}` = {value} deg outside valid domain [{lo}, {hi}] deg")]
    AngleOutOfDomain {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("relative load f_MVC = {0} outside (0, 1]")]
    LoadRatioOutOfRange(f64),

    #[error("non-finite load component in load applied to `{0}`")]
    NonFiniteLoad(String),

    #[error("nonphysical strength {0} N*m (must be > 0)")]
    NonphysicalStrength(f64),

    #[error("invalid time step dt = {0} min (must be > 0)")]
    InvalidTimeStep(f64),

    #[error("endurance time must be >= 0, got {0} min")]
    NegativeEnduranceTime(f64),

    #[error("expression error at position {pos}: {msg}")]
    Expression { pos: usize, msg: String },

    #[error("model `{name}` is not finite at x = {x}")]
    ModelNotFinite { name: String, x: f64 },

    #[error("data file {file}: {msg}")]
    DataFile { file: String, msg: String },

    #[error("scenario error: {0}")]
    Scenario(String),
}

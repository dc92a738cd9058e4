use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("line transfer function evaluated at a pole (s = {s})")]
    Pole { s: Complex64 },

    #[error("sending-bus voltage magnitude {magnitude} V is at or below the control floor {floor} V")]
    Singular { magnitude: f64, floor: f64 },

    #[error("simulation diverged at t = {t} s")]
    Divergence { t: f64 },

    #[error("requested flow of {requested_w} W is outside the transfer capability of {limit_w} W")]
    Capability { requested_w: f64, limit_w: f64 },

    #[error("analysis window holds {got} samples, at least {need} are required")]
    WindowTooShort { got: usize, need: usize },

    #[error("series carries no oscillatory content")]
    NoSignal,

    #[error("found {found} envelope peaks, at least 4 are required")]
    InsufficientCycles { found: usize },

    #[error("reference series has no energy in the comparison band")]
    DegenerateComparison,
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

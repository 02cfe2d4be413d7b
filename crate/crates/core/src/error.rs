use thiserror::Error;

/// Errors raised while constructing or evaluating frequency, severity and
/// aggregate-risk models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid horizon [{start}, {end}]")]
    InvalidHorizon { start: f64, end: f64 },

    #[error("year index {t} is outside the model horizon [{start}, {end}]")]
    OutsideHorizon { t: f64, start: f64, end: f64 },

    #[error("{what} is non-positive ({value}) at t = {t}")]
    NonPositiveDriver { what: &'static str, t: f64, value: f64 },

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("{family} shape must be {constraint}, got {value}")]
    InvalidShape {
        family: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("{name} must be {constraint}, got {value}")]
    InvalidArgument {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("degenerate model: {0}")]
    Degenerate(&'static str),
}

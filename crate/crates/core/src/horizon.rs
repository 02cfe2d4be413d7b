use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Closed interval of year indices over which a model is declared valid.
///
/// Year indices are offsets from the start of a simulation or record
/// (`t = 1` is the first year), but any real interval is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub start: f64,
    pub end: f64,
}

impl Horizon {
    pub fn new(start: f64, end: f64) -> Result<Self, ModelError> {
        if !start.is_finite() || !end.is_finite() || start > end {
            return Err(ModelError::InvalidHorizon { start, end });
        }
        Ok(Self { start, end })
    }

    /// Horizon `[1, years]` in offset coordinates.
    pub fn years(years: u32) -> Result<Self, ModelError> {
        Self::new(1.0, f64::from(years))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn covers(&self, other: &Horizon) -> bool {
        self.start <= other.start && self.end >= other.end
    }

    pub(crate) fn check(&self, t: f64) -> Result<(), ModelError> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(ModelError::OutsideHorizon {
                t,
                start: self.start,
                end: self.end,
            })
        }
    }
}

/// Linear driver `intercept + slope * t`, checked for positivity at both
/// ends of a horizon (sufficient for a linear function).
pub(crate) fn check_linear_positive(
    what: &'static str,
    intercept: f64,
    slope: f64,
    horizon: &Horizon,
) -> Result<(), ModelError> {
    if !intercept.is_finite() || !slope.is_finite() {
        return Err(ModelError::NonFinite { what });
    }
    match first_non_positive(intercept, slope, horizon) {
        Some(t) => Err(ModelError::NonPositiveDriver {
            what,
            t,
            value: intercept + slope * t,
        }),
        None => Ok(()),
    }
}

/// First integer-aligned year in the horizon where the linear driver is `<= 0`.
fn first_non_positive(intercept: f64, slope: f64, horizon: &Horizon) -> Option<f64> {
    if slope == 0.0 {
        return (intercept <= 0.0).then_some(horizon.start);
    }
    // Root of intercept + slope * t = 0.
    let root = -intercept / slope;
    let candidate = if slope < 0.0 {
        root.max(horizon.start).ceil()
    } else {
        horizon.start
    };
    let candidate = if candidate > horizon.end {
        horizon.end
    } else {
        candidate
    };
    (intercept + slope * candidate <= 0.0).then_some(candidate)
}

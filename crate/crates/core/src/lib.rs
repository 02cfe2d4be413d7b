//! Aggregate risk of randomly occurring events under time-varying frequency
//! and severity.
//!
//! The yearly aggregate `S_t = X_1t + ... + X_{N_t t}` is a random sum of
//! i.i.d. intensities with a Poisson count. This crate provides
//!
//! * [`severity`] and [`frequency`]: the intensity and count models,
//! * [`riskmodel`]: closed-form moments, covariance and correlation of `(N, S)`,
//! * [`simulate`]: seeded catalogs and fixed-year replicate ensembles,
//! * [`estimate`]: long-run estimators and diagnostics over catalogs,
//! * [`verify`]: Monte Carlo checks of the closed forms,
//! * [`io`]: CSV and JSON formats.

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod frequency;
pub mod horizon;
pub mod io;
pub mod riskmodel;
pub mod rng;
mod sampling;
pub mod severity;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use error::ModelError;
pub use estimate::{
    expanding_correlation, fisher_interval, long_run_series, mailier_index, moving_window_correlation,
    nx_independence, season_activity, CorrelationPoint, EstimateError, LongRunPoint, LongRunSeries,
    SeasonActivity,
};
pub use frequency::{FrequencyModel, RateLink};
pub use horizon::Horizon;
pub use riskmodel::{risk_summary, table1_row, RiskSummary};
pub use severity::{Moments, SeverityFamily, SeverityModel, TrendParams};
pub use simulate::{
    replicate_fixed_year, simulate_catalog, Event, EventCatalog, Replicate, SimulationConfig, SimulationError,
};
pub use verify::{verify_fixed_year, CheckResult, VerifyReport};

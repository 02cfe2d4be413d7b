//! Empirical estimators over event catalogs.
//!
//! Long-run ("cumulative in time") estimates at cutoff `t`, over the first
//! `t` years of a catalog:
//!
//! * `E[N](t) = sum N_y / t`
//! * `E[S](t) = sum S_y / t`
//! * `E[X](t) = sum S_y / sum N_y` (pooled over every event so far)
//! * `phi(t) = (sum N_y^2 / t - E[N](t)^2) / E[N](t)`
//!
//! `E[N](t) * E[X](t) = E[S](t)` holds at every cutoff with at least one
//! event. Variances here use denominator `n` throughout, except for the
//! season-activity threshold which uses the sample standard deviation.
//!
//! Undefined quantities (no events yet, zero variance, too few years) are
//! `None`, never zero or NaN.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulate::EventCatalog;
use crate::stats::{normal_quantile, pearson, RunningCovariance, RunningMoments};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("catalog is empty")]
    Empty,
    #[error("{what} needs at least {needed} years, got {got}")]
    TooFewYears {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("{name} must be {constraint}, got {value}")]
    InvalidArgument {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("window of {window} years exceeds catalog length {years}")]
    WindowTooLarge { window: usize, years: usize },
    #[error("mean count is zero")]
    ZeroMean,
}

/// Long-run estimates at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunPoint {
    /// Number of years included (1-based cutoff).
    pub t: usize,
    /// Calendar year of the cutoff.
    pub year: i64,
    pub e_n: f64,
    pub e_s: f64,
    pub e_x: Option<f64>,
    pub phi: Option<f64>,
    pub rho: Option<f64>,
    pub rho_lo: Option<f64>,
    pub rho_hi: Option<f64>,
    pub j2phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunSeries {
    /// Confidence level of the (approximate) Fisher intervals.
    pub level: f64,
    pub points: Vec<LongRunPoint>,
}

impl LongRunSeries {
    pub fn terminal(&self) -> &LongRunPoint {
        self.points.last().expect("series is never empty")
    }
}

/// One correlation estimate with its approximate Fisher interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    /// 1-based index of the last year in the window.
    pub t: usize,
    pub year: i64,
    /// Number of years in the window.
    pub n: usize,
    pub rho: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonActivity {
    Active,
    Inactive,
}

fn check_level(level: f64) -> Result<(), EstimateError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(EstimateError::InvalidArgument {
            name: "level",
            constraint: "in (0, 1)",
            value: level,
        })
    }
}

/// Approximate confidence interval for a correlation from `n` pairs via the
/// Fisher transformation: `atanh(rho) ± q / sqrt(n - 3)`, back-transformed
/// with `tanh`.
pub fn fisher_interval(rho: f64, n: usize, level: f64) -> Result<(f64, f64), EstimateError> {
    if !(rho.abs() < 1.0) {
        return Err(EstimateError::InvalidArgument {
            name: "rho",
            constraint: "strictly inside (-1, 1)",
            value: rho,
        });
    }
    if n <= 3 {
        return Err(EstimateError::TooFewYears {
            what: "a Fisher interval",
            needed: 4,
            got: n,
        });
    }
    check_level(level)?;
    let z = rho.atanh();
    let half = normal_quantile(0.5 * (1.0 + level)) / ((n - 3) as f64).sqrt();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

fn correlation_point(t: usize, year: i64, n: usize, rho: Option<f64>, level: f64) -> CorrelationPoint {
    let rho = if n >= 3 { rho } else { None };
    let (lo, hi) = match rho {
        Some(r) if n >= 4 && r.abs() < 1.0 => match fisher_interval(r, n, level) {
            Ok((lo, hi)) => (Some(lo), Some(hi)),
            Err(_) => (None, None),
        },
        _ => (None, None),
    };
    CorrelationPoint {
        t,
        year,
        n,
        rho,
        lo,
        hi,
    }
}

fn expanding_points(catalog: &EventCatalog, level: f64) -> Vec<CorrelationPoint> {
    let mut acc = RunningCovariance::default();
    catalog
        .years()
        .enumerate()
        .map(|(i, rec)| {
            acc.push(rec.count as f64, rec.sum);
            correlation_point(i + 1, rec.year, i + 1, acc.correlation(), level)
        })
        .collect()
}

/// Long-run estimates at every cutoff year.
pub fn long_run_series(catalog: &EventCatalog, level: f64) -> Result<LongRunSeries, EstimateError> {
    if catalog.num_years() == 0 {
        return Err(EstimateError::Empty);
    }
    check_level(level)?;
    let correlations = expanding_points(catalog, level);

    let mut counts = RunningMoments::default();
    let mut pooled = RunningMoments::default();
    let mut total_n = 0u64;
    let mut total_s = 0.0;
    let mut events = catalog.events().iter().peekable();
    let mut points = Vec::with_capacity(catalog.num_years());

    for (i, (rec, cor)) in catalog.years().zip(correlations).enumerate() {
        let t = (i + 1) as f64;
        counts.push(rec.count as f64);
        total_n += rec.count;
        total_s += rec.sum;
        while let Some(e) = events.next_if(|e| e.year == rec.year) {
            pooled.push(e.intensity);
        }

        let e_n = total_n as f64 / t;
        let e_s = total_s / t;
        let e_x = (total_n > 0).then(|| total_s / total_n as f64);
        let phi = (total_n > 0).then(|| counts.population_variance() / counts.mean());
        let var_x = pooled.population_variance();
        let j2phi = match (phi, e_x) {
            (Some(phi), Some(e_x)) if var_x > 0.0 => Some(phi * e_x * e_x / var_x),
            _ => None,
        };
        points.push(LongRunPoint {
            t: i + 1,
            year: rec.year,
            e_n,
            e_s,
            e_x,
            phi,
            rho: cor.rho,
            rho_lo: cor.lo,
            rho_hi: cor.hi,
            j2phi,
        });
    }
    Ok(LongRunSeries { level, points })
}

/// Pearson correlation of `(N_y, S_y)` over the first `t` years, for every `t`.
/// Entries before the third year, and windows where either margin is
/// constant, carry `rho = None`.
pub fn expanding_correlation(catalog: &EventCatalog, level: f64) -> Result<Vec<CorrelationPoint>, EstimateError> {
    check_level(level)?;
    if catalog.num_years() < 3 {
        return Err(EstimateError::TooFewYears {
            what: "expanding correlation",
            needed: 3,
            got: catalog.num_years(),
        });
    }
    Ok(expanding_points(catalog, level))
}

/// Pearson correlation of `(N_y, S_y)` over each trailing window of `window` years.
pub fn moving_window_correlation(
    catalog: &EventCatalog,
    window: usize,
    level: f64,
) -> Result<Vec<CorrelationPoint>, EstimateError> {
    check_level(level)?;
    if window < 3 {
        return Err(EstimateError::InvalidArgument {
            name: "window",
            constraint: ">= 3",
            value: window as f64,
        });
    }
    let years = catalog.num_years();
    if window > years {
        return Err(EstimateError::WindowTooLarge { window, years });
    }
    let n: Vec<f64> = catalog.counts().iter().map(|&c| c as f64).collect();
    let s = catalog.sums();
    Ok((window..=years)
        .map(|end| {
            let rho = pearson(&n[end - window..end], &s[end - window..end]);
            let year = catalog.first_year() + end as i64 - 1;
            correlation_point(end, year, window, rho, level)
        })
        .collect())
}

/// Correlation between yearly counts and yearly mean intensity `S_y / N_y`,
/// skipping years without events. `Ok(None)` when either margin is constant.
pub fn nx_independence(catalog: &EventCatalog) -> Result<Option<f64>, EstimateError> {
    let (n, mean_x): (Vec<f64>, Vec<f64>) = catalog
        .years()
        .filter(|r| r.count > 0)
        .map(|r| (r.count as f64, r.sum / r.count as f64))
        .unzip();
    if n.len() < 3 {
        return Err(EstimateError::TooFewYears {
            what: "the N-X independence diagnostic (years with events)",
            needed: 3,
            got: n.len(),
        });
    }
    Ok(pearson(&n, &mean_x))
}

/// A year is active when its count exceeds `mean + sd` of all counts (sample
/// sd); a count equal to the threshold is inactive.
pub fn season_activity(counts: &[u64]) -> Result<Vec<SeasonActivity>, EstimateError> {
    let mut acc = RunningMoments::default();
    counts.iter().for_each(|&c| acc.push(c as f64));
    let var = acc.sample_variance().ok_or(EstimateError::TooFewYears {
        what: "season activity",
        needed: 2,
        got: counts.len(),
    })?;
    let threshold = acc.mean() + var.sqrt();
    Ok(counts
        .iter()
        .map(|&c| {
            if c as f64 > threshold {
                SeasonActivity::Active
            } else {
                SeasonActivity::Inactive
            }
        })
        .collect())
}

/// `Var(N) / E[N]` with population variance.
pub fn dispersion_statistic(counts: &[u64]) -> Result<f64, EstimateError> {
    if counts.len() < 2 {
        return Err(EstimateError::TooFewYears {
            what: "the dispersion statistic",
            needed: 2,
            got: counts.len(),
        });
    }
    let mut acc = RunningMoments::default();
    counts.iter().for_each(|&c| acc.push(c as f64));
    if acc.mean() <= 0.0 {
        return Err(EstimateError::ZeroMean);
    }
    Ok(acc.population_variance() / acc.mean())
}

/// Dispersion index under the subtract-one convention: `Var(N) / E[N] - 1`
/// (0 for Poisson counts).
pub fn mailier_index(counts: &[u64]) -> Result<f64, EstimateError> {
    Ok(dispersion_statistic(counts)? - 1.0)
}

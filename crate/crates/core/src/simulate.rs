//! Seeded Monte Carlo generation of yearly marked point processes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::frequency::FrequencyModel;
use crate::horizon::Horizon;
use crate::rng::{substream, year_stream, StreamDomain};
use crate::sampling;
use crate::severity::SeverityModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("catalog has no years")]
    Empty,
    #[error("intensity must be positive and finite, got {value} in year {year}")]
    NonPositiveIntensity { year: i64, value: f64 },
    #[error("event year {year} outside catalog range [{first}, {last}]")]
    YearOutOfRange { year: i64, first: i64, last: i64 },
}

/// A single event: the year it occurred and its intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub year: i64,
    pub intensity: f64,
}

/// Per-year view of a catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearRecord {
    pub year: i64,
    pub count: u64,
    pub sum: f64,
}

/// Events grouped into a contiguous run of years. Years without events are
/// kept with `count = 0` and `sum = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCatalog {
    first_year: i64,
    /// Sorted by year; order within a year is preserved.
    events: Vec<Event>,
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl EventCatalog {
    /// Build a catalog spanning the smallest and largest event years.
    pub fn from_events(events: Vec<Event>) -> Result<Self, CatalogError> {
        let first = events.iter().map(|e| e.year).min().ok_or(CatalogError::Empty)?;
        let last = events.iter().map(|e| e.year).max().ok_or(CatalogError::Empty)?;
        Self::with_range(first, last, events)
    }

    /// Build a catalog over `[first_year, last_year]`, which must contain every event year.
    pub fn with_range(first_year: i64, last_year: i64, events: Vec<Event>) -> Result<Self, CatalogError> {
        if last_year < first_year {
            return Err(CatalogError::Empty);
        }
        let mut by_year: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for e in events {
            if !(e.intensity > 0.0 && e.intensity.is_finite()) {
                return Err(CatalogError::NonPositiveIntensity {
                    year: e.year,
                    value: e.intensity,
                });
            }
            if e.year < first_year || e.year > last_year {
                return Err(CatalogError::YearOutOfRange {
                    year: e.year,
                    first: first_year,
                    last: last_year,
                });
            }
            by_year.entry(e.year).or_default().push(e.intensity);
        }
        let per_year = (first_year..=last_year)
            .map(|y| by_year.remove(&y).unwrap_or_default())
            .collect();
        Ok(Self::from_year_lists(first_year, per_year))
    }

    /// Build from one intensity list per consecutive year starting at `first_year`.
    pub(crate) fn from_year_lists(first_year: i64, per_year: Vec<Vec<f64>>) -> Self {
        let total: usize = per_year.iter().map(Vec::len).sum();
        let mut events = Vec::with_capacity(total);
        let mut counts = Vec::with_capacity(per_year.len());
        let mut sums = Vec::with_capacity(per_year.len());
        for (offset, xs) in per_year.into_iter().enumerate() {
            let year = first_year + offset as i64;
            counts.push(xs.len() as u64);
            sums.push(xs.iter().sum());
            events.extend(xs.into_iter().map(|intensity| Event { year, intensity }));
        }
        Self {
            first_year,
            events,
            counts,
            sums,
        }
    }

    pub fn first_year(&self) -> i64 {
        self.first_year
    }

    pub fn last_year(&self) -> i64 {
        self.first_year + self.counts.len() as i64 - 1
    }

    /// Number of years covered, including years without events.
    pub fn num_years(&self) -> usize {
        self.counts.len()
    }

    pub fn total_events(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// `N_t` for each year in order.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `S_t` for each year in order.
    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn years(&self) -> impl Iterator<Item = YearRecord> + '_ {
        self.counts
            .iter()
            .zip(&self.sums)
            .enumerate()
            .map(move |(i, (&count, &sum))| YearRecord {
                year: self.first_year + i as i64,
                count,
                sum,
            })
    }

    /// Intensities of the events in `year`, in catalog order.
    pub fn year_intensities(&self, year: i64) -> impl Iterator<Item = f64> + '_ {
        let start = self.events.partition_point(|e| e.year < year);
        self.events[start..]
            .iter()
            .take_while(move |e| e.year == year)
            .map(|e| e.intensity)
    }
}

/// Models, calendar range and seed of a simulation run.
///
/// Model year indices are offsets: calendar year `first_year` is `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub freq: FrequencyModel,
    pub sev: SeverityModel,
    pub first_year: i64,
    pub last_year: i64,
    pub seed: u64,
    pub replicates: usize,
}

impl SimulationConfig {
    pub fn new(
        freq: FrequencyModel,
        sev: SeverityModel,
        first_year: i64,
        last_year: i64,
        seed: u64,
    ) -> Result<Self, SimulationError> {
        let cfg = Self {
            freq,
            sev,
            first_year,
            last_year,
            seed,
            replicates: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn num_years(&self) -> usize {
        (self.last_year - self.first_year + 1).max(0) as usize
    }

    /// Offset year index of a calendar year.
    pub fn offset(&self, year: i64) -> f64 {
        (year - self.first_year + 1) as f64
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.first_year > self.last_year {
            return Err(SimulationError::InvalidConfig(format!(
                "first year {} is after last year {}",
                self.first_year, self.last_year
            )));
        }
        let span = Horizon::new(1.0, self.num_years() as f64)?;
        if !self.freq.horizon().covers(&span) {
            return Err(SimulationError::InvalidConfig(format!(
                "frequency horizon [{}, {}] does not cover years [1, {}]",
                self.freq.horizon().start,
                self.freq.horizon().end,
                span.end
            )));
        }
        if !self.sev.horizon().covers(&span) {
            return Err(SimulationError::InvalidConfig(format!(
                "severity horizon [{}, {}] does not cover years [1, {}]",
                self.sev.horizon().start,
                self.sev.horizon().end,
                span.end
            )));
        }
        Ok(())
    }
}

/// Draws for one replicate of a fixed year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    pub n: u64,
    pub s: f64,
    /// The first intensity of the year, if any event occurred.
    pub first_intensity: Option<f64>,
}

/// Draw one year's intensities from its own substream.
fn simulate_year(cfg: &SimulationConfig, year: i64) -> Result<Vec<f64>, ModelError> {
    let t = cfg.offset(year);
    let mut rng = year_stream(cfg.seed, year);
    let lambda = cfg.freq.rate(t)?;
    let mu = cfg.sev.driver(t)?;
    let n = sampling::poisson(lambda, &mut rng);
    Ok((0..n).map(|_| cfg.sev.sample_with_driver(mu, &mut rng)).collect())
}

/// Simulate a full catalog: `N_t` events per year, each with an i.i.d.
/// intensity for that year. Each calendar year uses its own substream, so
/// output is identical regardless of thread count or year range.
pub fn simulate_catalog(cfg: &SimulationConfig) -> Result<EventCatalog, SimulationError> {
    cfg.validate()?;
    let per_year = (cfg.first_year..=cfg.last_year)
        .into_par_iter()
        .map(|year| simulate_year(cfg, year))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EventCatalog::from_year_lists(cfg.first_year, per_year))
}

/// `cfg.replicates` independent draws of `(N_t, S_t)` at offset year `t`.
/// Replicate `r` always uses substream `(seed, r)`.
pub fn replicate_fixed_year(cfg: &SimulationConfig, t: f64) -> Result<Vec<Replicate>, SimulationError> {
    cfg.validate()?;
    if cfg.replicates < 2 {
        return Err(SimulationError::InvalidConfig(format!(
            "replicates must be >= 2, got {}",
            cfg.replicates
        )));
    }
    if !(t >= 1.0 && t <= cfg.num_years() as f64) {
        return Err(ModelError::OutsideHorizon {
            t,
            start: 1.0,
            end: cfg.num_years() as f64,
        }
        .into());
    }
    let lambda = cfg.freq.rate(t)?;
    let mu = cfg.sev.driver(t)?;
    let sev = cfg.sev;
    let seed = cfg.seed;
    Ok((0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, StreamDomain::Replicate, r);
            let n = sampling::poisson(lambda, &mut rng);
            let mut s = 0.0;
            let mut first = None;
            for _ in 0..n {
                let x = sev.sample_with_driver(mu, &mut rng);
                first.get_or_insert(x);
                s += x;
            }
            Replicate {
                n,
                s,
                first_intensity: first,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::RateLink;
    use crate::severity::{SeverityFamily, TrendParams};

    fn cfg(lambda: f64, years: u32, seed: u64) -> SimulationConfig {
        let h = Horizon::years(years).unwrap();
        SimulationConfig::new(
            FrequencyModel::constant(lambda, h).unwrap(),
            SeverityModel::stationary(SeverityFamily::Exponential, 2.0, h).unwrap(),
            2001,
            2000 + years as i64,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn catalog_from_events_fills_gaps() {
        let cat = EventCatalog::from_events(vec![
            Event { year: 2042, intensity: 1.5 },
            Event { year: 2040, intensity: 2.0 },
            Event { year: 2040, intensity: 3.0 },
        ])
        .unwrap();
        assert_eq!(cat.first_year(), 2040);
        assert_eq!(cat.last_year(), 2042);
        assert_eq!(cat.counts(), &[2, 0, 1]);
        assert_eq!(cat.sums(), &[5.0, 0.0, 1.5]);
        assert_eq!(cat.year_intensities(2040).collect::<Vec<_>>(), vec![2.0, 3.0]);
        assert_eq!(cat.year_intensities(2041).count(), 0);
    }

    #[test]
    fn catalog_rejects_bad_events() {
        assert_eq!(EventCatalog::from_events(vec![]), Err(CatalogError::Empty));
        assert!(matches!(
            EventCatalog::from_events(vec![Event { year: 1, intensity: 0.0 }]),
            Err(CatalogError::NonPositiveIntensity { .. })
        ));
        assert!(matches!(
            EventCatalog::with_range(1, 3, vec![Event { year: 5, intensity: 1.0 }]),
            Err(CatalogError::YearOutOfRange { .. })
        ));
    }

    #[test]
    fn near_zero_rate_gives_empty_years() {
        let cat = simulate_catalog(&cfg(0.001, 10, 17)).unwrap();
        assert_eq!(cat.num_years(), 10);
        for rec in cat.years() {
            if rec.count == 0 {
                assert_eq!(rec.sum, 0.0);
            }
        }
        assert!(cat.total_events() <= 1);
    }

    #[test]
    fn deterministic_and_range_stable() {
        let a = simulate_catalog(&cfg(5.0, 30, 99)).unwrap();
        let b = simulate_catalog(&cfg(5.0, 30, 99)).unwrap();
        assert_eq!(a, b);

        // A calendar year keeps its draws when the range is shifted, as long
        // as its model parameters are unchanged (stationary here).
        let h = Horizon::years(40).unwrap();
        let longer = SimulationConfig::new(
            FrequencyModel::constant(5.0, h).unwrap(),
            SeverityModel::stationary(SeverityFamily::Exponential, 2.0, h).unwrap(),
            1991,
            2030,
            99,
        )
        .unwrap();
        let c = simulate_catalog(&longer).unwrap();
        for year in 2001..=2030 {
            let x: Vec<f64> = a.year_intensities(year).collect();
            let y: Vec<f64> = c.year_intensities(year).collect();
            assert_eq!(x, y, "year {year}");
        }
    }

    #[test]
    fn gpd_model_total_count() {
        let h = Horizon::years(60).unwrap();
        let cfg = SimulationConfig::new(
            FrequencyModel::new(20.0, 0.5, RateLink::Identity, h).unwrap(),
            SeverityModel::new(SeverityFamily::Gpd { xi: 0.2 }, TrendParams::new(0.05, 0.001), h).unwrap(),
            1,
            60,
            2024,
        )
        .unwrap();
        let expected: f64 = (1..=60).map(|t| 20.0 + 0.5 * t as f64).sum();
        assert_eq!(expected, 2115.0);
        let cat = simulate_catalog(&cfg).unwrap();
        let total = cat.total_events() as f64;
        assert!((total - expected).abs() < 4.0 * expected.sqrt(), "total {total}");
    }

    #[test]
    fn config_validation() {
        let h = Horizon::years(10).unwrap();
        let f = FrequencyModel::constant(1.0, h).unwrap();
        let s = SeverityModel::stationary(SeverityFamily::Uniform, 1.0, h).unwrap();
        assert!(SimulationConfig::new(f, s, 5, 4, 0).is_err());
        assert!(SimulationConfig::new(f, s, 1, 11, 0).is_err());
        assert!(SimulationConfig::new(f, s, 1991, 2000, 0).is_ok());
        let c = SimulationConfig::new(f, s, 1, 10, 0).unwrap();
        assert!(replicate_fixed_year(&c.with_replicates(1), 1.0).is_err());
        assert!(replicate_fixed_year(&c.with_replicates(5), 11.0).is_err());
    }

    #[test]
    fn replicates_are_order_independent() {
        let c = cfg(3.0, 5, 7).with_replicates(1000);
        let a = replicate_fixed_year(&c, 2.0).unwrap();
        let b = replicate_fixed_year(&c.with_replicates(10), 2.0).unwrap();
        assert_eq!(&a[..10], &b[..]);
        for r in &a {
            assert_eq!(r.n == 0, r.first_intensity.is_none());
            if r.n == 0 {
                assert_eq!(r.s, 0.0);
            }
        }
    }
}

//! Event-catalog CSV, long-run series CSV and JSON run configuration.
//!
//! Events CSV: UTF-8, header `year,intensity`, one event per row, rows in any
//! order, `.` as the decimal separator, LF or CRLF line endings.
//!
//! Series CSV: header `t,e_n,e_s,e_x,phi,rho,rho_lo,rho_hi,j2phi` where `t`
//! is the calendar year of the cutoff; undefined values are empty fields.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::estimate::{LongRunPoint, LongRunSeries};
use crate::frequency::{FrequencyModel, RateLink};
use crate::horizon::Horizon;
use crate::severity::{SeverityFamily, SeverityModel, TrendParams};
use crate::simulate::{CatalogError, Event, EventCatalog, SimulationConfig, SimulationError};

pub const EVENTS_HEADER: [&str; 2] = ["year", "intensity"];
pub const SERIES_HEADER: [&str; 9] = ["t", "e_n", "e_s", "e_x", "phi", "rho", "rho_lo", "rho_hi", "j2phi"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line 1: expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("file is empty")]
    Empty,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File, IoError> {
    File::create(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Read records, checking the header row; yields `(line, record)`.
fn read_records<R: Read>(input: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, IoError> {
    let mut rdr = csv_reader(input);
    let mut rows = rdr.records();
    let first = match rows.next() {
        None => return Err(IoError::Empty),
        Some(r) => r?,
    };
    let found: Vec<&str> = first.iter().collect();
    // Strip a UTF-8 BOM from the first field if present.
    let found_clean: Vec<&str> = found
        .iter()
        .enumerate()
        .map(|(i, f)| if i == 0 { f.trim_start_matches('\u{feff}') } else { f })
        .collect();
    if found_clean != header {
        return Err(IoError::Header {
            expected: header.join(","),
            found: found.join(","),
        });
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != header.len() {
            return Err(IoError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        out.push((line, row));
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(line: u64, name: &str, raw: &str) -> Result<T, IoError> {
    raw.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("{name} `{raw}` is not a valid number"),
    })
}

fn parse_optional(line: u64, name: &str, raw: &str) -> Result<Option<f64>, IoError> {
    if raw.is_empty() {
        Ok(None)
    } else {
        parse_field(line, name, raw).map(Some)
    }
}

/// Parse an events CSV from any reader.
pub fn read_events<R: Read>(input: R) -> Result<EventCatalog, IoError> {
    let rows = read_records(input, &EVENTS_HEADER)?;
    let mut events = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let year: i64 = parse_field(line, "year", &row[0])?;
        let intensity: f64 = parse_field(line, "intensity", &row[1])?;
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(IoError::Parse {
                line,
                message: format!("intensity must be positive, got {intensity}"),
            });
        }
        events.push(Event { year, intensity });
    }
    if events.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(EventCatalog::from_events(events)?)
}

pub fn read_events_csv(path: &Path) -> Result<EventCatalog, IoError> {
    read_events(open(path)?)
}

pub fn write_events<W: Write>(catalog: &EventCatalog, output: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(EVENTS_HEADER)?;
    for e in catalog.events() {
        w.write_record([e.year.to_string(), e.intensity.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_events_csv(catalog: &EventCatalog, path: &Path) -> Result<(), IoError> {
    write_events(catalog, create(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_series<W: Write>(series: &LongRunSeries, output: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(SERIES_HEADER)?;
    for p in &series.points {
        w.write_record([
            p.year.to_string(),
            p.e_n.to_string(),
            p.e_s.to_string(),
            opt(p.e_x),
            opt(p.phi),
            opt(p.rho),
            opt(p.rho_lo),
            opt(p.rho_hi),
            opt(p.j2phi),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_series_csv(series: &LongRunSeries, path: &Path) -> Result<(), IoError> {
    write_series(series, create(path)?)
}

/// Parse a series CSV; cutoff indices are reconstructed from row order.
pub fn read_series<R: Read>(input: R) -> Result<Vec<LongRunPoint>, IoError> {
    read_records(input, &SERIES_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(i, (line, row))| {
            let req = |k: usize| parse_field::<f64>(line, SERIES_HEADER[k], &row[k]);
            let o = |k: usize| parse_optional(line, SERIES_HEADER[k], &row[k]);
            Ok(LongRunPoint {
                t: i + 1,
                year: parse_field(line, "t", &row[0])?,
                e_n: req(1)?,
                e_s: req(2)?,
                e_x: o(3)?,
                phi: o(4)?,
                rho: o(5)?,
                rho_lo: o(6)?,
                rho_hi: o(7)?,
                j2phi: o(8)?,
            })
        })
        .collect()
}

pub fn read_series_csv(path: &Path) -> Result<Vec<LongRunPoint>, IoError> {
    read_series(open(path)?)
}

// ---------------------------------------------------------------------------
// Run configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Theory,
    Simulate,
    Analyze,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub link: RateLink,
    pub alpha0: f64,
    #[serde(default)]
    pub alpha1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeveritySpec {
    pub family: String,
    pub beta0: f64,
    #[serde(default)]
    pub beta1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YearRange {
    pub start: i64,
    pub end: i64,
}

/// JSON run configuration as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<SeveritySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub years: Option<YearRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Offset year index used by `verify` (defaults to 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_year: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_replicates() -> usize {
    1
}

fn default_ci_level() -> f64 {
    0.95
}

/// Validated frequency and severity models over a calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub freq: FrequencyModel,
    pub sev: SeverityModel,
    pub years: YearRange,
}

impl ModelSpec {
    pub fn simulation(&self, seed: u64) -> Result<SimulationConfig, SimulationError> {
        SimulationConfig::new(self.freq, self.sev, self.years.start, self.years.end, seed)
    }

    pub fn num_years(&self) -> u32 {
        (self.years.end - self.years.start + 1) as u32
    }
}

/// A configuration whose parameters satisfy every model invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub model: Option<ModelSpec>,
}

impl RunConfig {
    pub fn mode(&self) -> Option<Mode> {
        self.file.mode
    }

    pub fn seed(&self) -> Option<u64> {
        self.file.seed
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

impl ConfigError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            message: message.into(),
        }
    }

    fn model(field: &'static str, err: ModelError) -> Self {
        Self::invalid(field, err.to_string())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Schema {
        path: ".".into(),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(ConfigError::Schema {
            path: ".".into(),
            message: "expected a JSON object".into(),
        });
    }
    let file: ConfigFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    validate_config(file)
}

pub fn validate_config(file: ConfigFile) -> Result<RunConfig, ConfigError> {
    if !(file.ci_level > 0.0 && file.ci_level < 1.0) {
        return Err(ConfigError::invalid(
            "ci_level",
            format!("must be in (0, 1), got {}", file.ci_level),
        ));
    }
    if file.replicates == 0 {
        return Err(ConfigError::invalid("replicates", "must be positive"));
    }
    if let Some(w) = file.window {
        if w < 3 {
            return Err(ConfigError::invalid("window", format!("must be >= 3, got {w}")));
        }
    }
    if let Some(y) = file.years {
        if y.start > y.end {
            return Err(ConfigError::invalid(
                "years",
                format!("start {} is after end {}", y.start, y.end),
            ));
        }
    }

    let model = match (&file.frequency, &file.severity) {
        (None, None) => None,
        (Some(_), None) => return Err(ConfigError::invalid("severity", "required with `frequency`")),
        (None, Some(_)) => return Err(ConfigError::invalid("frequency", "required with `severity`")),
        (Some(f), Some(s)) => {
            let years = file
                .years
                .ok_or_else(|| ConfigError::invalid("years", "required when models are given"))?;
            let horizon = Horizon::new(1.0, (years.end - years.start + 1) as f64)
                .map_err(|e| ConfigError::model("years", e))?;
            let freq = FrequencyModel::new(f.alpha0, f.alpha1, f.link, horizon)
                .map_err(|e| ConfigError::model("frequency", e))?;
            let family =
                SeverityFamily::from_name(&s.family, s.shape).map_err(|m| ConfigError::invalid("severity.family", m))?;
            let sev = SeverityModel::new(family, TrendParams::new(s.beta0, s.beta1), horizon)
                .map_err(|e| ConfigError::model("severity", e))?;
            Some(ModelSpec { freq, sev, years })
        }
    };

    if let (Some(t), Some(m)) = (file.verify_year, &model) {
        if !(t >= 1.0 && t <= m.num_years() as f64) {
            return Err(ConfigError::invalid(
                "verify_year",
                format!("must be within [1, {}], got {t}", m.num_years()),
            ));
        }
    }
    Ok(RunConfig { file, model })
}

//! Command-line front end: theory tables, simulation, catalog analysis and
//! Monte Carlo verification.
//!
//! Every run produces an [`ExitReport`]. Data goes to `--out` when given
//! (with the JSON report on stdout), otherwise to stdout. The human summary
//! always goes to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use randsum::estimate::dispersion_statistic;
use randsum::io::{self, Mode, RunConfig};
use randsum::{
    long_run_series, mailier_index, moving_window_correlation, nx_independence, risk_summary,
    season_activity, simulate_catalog, table1_row, verify_fixed_year, EventCatalog, LongRunSeries,
    RiskSummary, SeverityFamily,
};

/// Environment variable consulted when a config carries no seed.
pub const SEED_ENV: &str = "RANDSUM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    VerificationFailure,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailure => 1,
            Status::InputError => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitReport {
    pub status: Status,
    pub summary: String,
    pub payload: Value,
    /// Data written to stdout when no `--out` was given.
    #[serde(skip)]
    pub stdout: Option<String>,
}

impl ExitReport {
    fn ok(summary: String, payload: Value, stdout: Option<String>) -> Self {
        Self {
            status: Status::Ok,
            summary,
            payload,
            stdout,
        }
    }

    fn input_error(summary: String) -> Self {
        Self {
            status: Status::InputError,
            payload: json!({ "error": summary }),
            summary,
            stdout: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "randsum", version, about = "Aggregate risk of random sums of events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form summaries per year, or the per-family table.
    #[command(allow_negative_numbers = true)]
    Theory(TheoryArgs),
    /// Simulate an event catalog.
    Simulate(SimulateArgs),
    /// Long-run estimates and diagnostics for an events CSV.
    Analyze(AnalyzeArgs),
    /// Fixed-year Monte Carlo checks of the closed forms.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct TheoryArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print one row per severity family instead of a per-year table.
    #[arg(long)]
    table1: bool,
    /// Severity driver for --table1.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Poisson rate for --table1.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Gamma shape for --table1.
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    /// Log-normal sigma for --table1.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// GPD shape for --table1.
    #[arg(long, default_value_t = 0.25)]
    xi: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Trailing window (years) for the correlation columns; expanding if absent.
    #[arg(long)]
    window: Option<usize>,
    /// Confidence level of the approximate Fisher intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    replicates: Option<usize>,
    /// Tolerance in standard errors per check.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    /// Offset year index to verify (1 = first year); defaults to the config's `verify_year` or 1.
    #[arg(long)]
    year: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse `argv` (including the program name) and run the subcommand.
pub fn run<I, T>(argv: I) -> ExitReport
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return ExitReport::ok(String::new(), Value::Null, Some(text));
            }
            return ExitReport::input_error(text);
        }
    };
    let result = match cli.command {
        Command::Theory(a) => theory(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Verify(a) => verify(a),
    };
    result.unwrap_or_else(|e| ExitReport::input_error(format!("{e:#}")))
}

fn load_config(path: &Path, mode: Mode) -> Result<RunConfig> {
    let cfg = io::parse_config(path).with_context(|| format!("config {}", path.display()))?;
    if let Some(m) = cfg.mode() {
        if m != mode {
            bail!("config mode {m:?} does not match subcommand {mode:?}");
        }
    }
    Ok(cfg)
}

fn resolve_seed(cfg: &RunConfig) -> Result<u64> {
    if let Some(seed) = cfg.seed() {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| anyhow!("{SEED_ENV}=`{raw}` is not an unsigned 64-bit integer")),
        Err(_) => bail!("no seed: set `seed` in the config or {SEED_ENV}"),
    }
}

fn emit(out: Option<&Path>, data: String) -> Result<Option<String>> {
    match out {
        Some(path) => {
            fs::write(path, data).with_context(|| format!("writing {}", path.display()))?;
            Ok(None)
        }
        None => Ok(Some(data)),
    }
}

fn is_json(path: Option<&Path>) -> bool {
    path.and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Table1Line {
    pub family: String,
    #[serde(flatten)]
    pub summary: RiskSummary,
}

/// One closed-form row per severity family.
pub fn table1(mu: f64, lambda: f64, theta: f64, sigma: f64, xi: f64) -> Result<Vec<Table1Line>> {
    [
        SeverityFamily::Uniform,
        SeverityFamily::Gamma { shape: theta },
        SeverityFamily::Exponential,
        SeverityFamily::LogNormal { sigma },
        SeverityFamily::Gpd { xi },
    ]
    .into_iter()
    .map(|family| {
        let summary = table1_row(family, mu, lambda).with_context(|| family.to_string())?;
        Ok(Table1Line {
            family: family.to_string(),
            summary,
        })
    })
    .collect()
}

const SUMMARY_HEADER: &str = "e_n,e_x,e_s,var_n,var_x,var_s,cov_ns,cor_ns,phi,j_squared";

fn summary_fields(s: &RiskSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        s.e_n, s.e_x, s.e_s, s.var_n, s.var_x, s.var_s, s.cov_ns, s.cor_ns, s.phi, s.j_squared
    )
}

fn theory(a: TheoryArgs) -> Result<ExitReport> {
    let out = a.out.as_deref();
    if a.table1 {
        let rows = table1(a.mu, a.lambda, a.theta, a.sigma, a.xi)?;
        let data = if is_json(out) {
            serde_json::to_string_pretty(&rows)?
        } else {
            let mut s = format!("family,{SUMMARY_HEADER}\n");
            for r in &rows {
                writeln!(s, "{},{}", r.family, summary_fields(&r.summary))?;
            }
            s
        };
        let stdout = emit(out, data)?;
        let mut summary = String::from("family               cor(N,S)    J^2\n");
        for r in &rows {
            writeln!(summary, "{:<20} {:>9.6} {:>9.6}", r.family, r.summary.cor_ns, r.summary.j_squared)?;
        }
        let payload = json!({
            "command": "theory",
            "table1": rows,
            "parameters": { "mu": a.mu, "lambda": a.lambda, "theta": a.theta, "sigma": a.sigma, "xi": a.xi },
        });
        return Ok(ExitReport::ok(summary, payload, stdout));
    }

    let path = a.config.ok_or_else(|| anyhow!("theory needs --config or --table1"))?;
    let cfg = load_config(&path, Mode::Theory)?;
    let model = cfg.model.ok_or_else(|| anyhow!("config has no frequency/severity models"))?;
    let rows: Vec<(i64, RiskSummary)> = (model.years.start..=model.years.end)
        .map(|year| {
            let t = (year - model.years.start + 1) as f64;
            Ok((year, risk_summary(&model.freq, &model.sev, t)?))
        })
        .collect::<Result<_>>()?;
    let data = if is_json(out) {
        let v: Vec<Value> = rows
            .iter()
            .map(|(year, s)| json!({ "year": year, "summary": s }))
            .collect();
        serde_json::to_string_pretty(&v)?
    } else {
        let mut s = format!("year,t,{SUMMARY_HEADER}\n");
        for (year, r) in &rows {
            writeln!(s, "{year},{},{}", r.t, summary_fields(r))?;
        }
        s
    };
    let stdout = emit(out, data)?;
    let summary = format!(
        "{} years, {} severity, cor(N,S) = {:.6}, J^2 = {:.6}",
        rows.len(),
        model.sev.family(),
        rows[0].1.cor_ns,
        rows[0].1.j_squared
    );
    let payload = json!({ "command": "theory", "config": cfg, "years": rows.len() });
    Ok(ExitReport::ok(summary, payload, stdout))
}

fn simulate(a: SimulateArgs) -> Result<ExitReport> {
    let cfg = load_config(&a.config, Mode::Simulate)?;
    let seed = resolve_seed(&cfg)?;
    let model = cfg.model.ok_or_else(|| anyhow!("config has no frequency/severity models"))?;
    let sim = model.simulation(seed)?;
    let catalog = simulate_catalog(&sim)?;
    let mut buf = Vec::new();
    io::write_events(&catalog, &mut buf)?;
    let stdout = emit(a.out.as_deref(), String::from_utf8(buf)?)?;
    let summary = format!(
        "simulated {} events over {} years (seed {seed})",
        catalog.total_events(),
        catalog.num_years()
    );
    let payload = json!({
        "command": "simulate",
        "config": cfg,
        "seed": seed,
        "years": catalog.num_years(),
        "events": catalog.total_events(),
    });
    Ok(ExitReport::ok(summary, payload, stdout))
}

/// Replace the correlation columns of a series with trailing-window estimates.
fn apply_window(series: &mut LongRunSeries, catalog: &EventCatalog, window: usize) -> Result<()> {
    let windowed = moving_window_correlation(catalog, window, series.level)?;
    for p in series.points.iter_mut() {
        p.rho = None;
        p.rho_lo = None;
        p.rho_hi = None;
    }
    for w in windowed {
        let p = &mut series.points[w.t - 1];
        p.rho = w.rho;
        p.rho_lo = w.lo;
        p.rho_hi = w.hi;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<ExitReport> {
    let catalog = io::read_events_csv(&a.input).with_context(|| format!("events {}", a.input.display()))?;
    let mut series = long_run_series(&catalog, a.level)?;
    if let Some(w) = a.window {
        apply_window(&mut series, &catalog, w)?;
    }

    let out = a.out.as_deref();
    let data = if is_json(out) {
        serde_json::to_string_pretty(&series)?
    } else {
        let mut buf = Vec::new();
        io::write_series(&series, &mut buf)?;
        String::from_utf8(buf)?
    };
    let stdout = emit(out, data)?;

    let counts = catalog.counts();
    let nx = nx_independence(&catalog).map_err(|e| e.to_string());
    let activity = season_activity(counts).map_err(|e| e.to_string());
    let mailier = mailier_index(counts).map_err(|e| e.to_string());
    let phi = dispersion_statistic(counts).map_err(|e| e.to_string());
    let last = series.terminal();

    let summary = format!(
        "{} years, {} events; terminal E[N] = {:.4}, E[X] = {}, E[S] = {:.4}, phi = {}, rho = {} (approximate {}% interval [{}, {}])",
        catalog.num_years(),
        catalog.total_events(),
        last.e_n,
        fmt_opt(last.e_x),
        last.e_s,
        fmt_opt(last.phi),
        fmt_opt(last.rho),
        series.level * 100.0,
        fmt_opt(last.rho_lo),
        fmt_opt(last.rho_hi),
    );
    let payload = json!({
        "command": "analyze",
        "input": a.input,
        "window": a.window,
        "level": a.level,
        "interval_note": "Fisher-transform intervals assume i.i.d. bivariate-normal pairs and are approximate",
        "terminal": last,
        "diagnostics": {
            "nx_independence": nx,
            "dispersion": phi,
            "mailier_index": mailier,
            "season_activity": activity.map(|v| {
                v.into_iter()
                    .zip(catalog.first_year()..)
                    .map(|(a, year)| json!({ "year": year, "activity": a }))
                    .collect::<Vec<_>>()
            }),
        },
    });
    Ok(ExitReport::ok(summary, payload, stdout))
}

fn verify(a: VerifyArgs) -> Result<ExitReport> {
    let cfg = load_config(&a.config, Mode::Verify)?;
    let seed = resolve_seed(&cfg)?;
    let model = cfg.model.ok_or_else(|| anyhow!("config has no frequency/severity models"))?;
    let replicates = a.replicates.unwrap_or(cfg.file.replicates);
    if replicates < 2 {
        bail!("verify needs at least 2 replicates (got {replicates}); pass --replicates");
    }
    if a.sigma.is_nan() || a.sigma <= 0.0 {
        bail!("--sigma must be positive");
    }
    let t = a.year.or(cfg.file.verify_year).unwrap_or(1.0);
    let sim = model.simulation(seed)?.with_replicates(replicates);
    let report = verify_fixed_year(&sim, t, a.sigma)?;

    let mut summary = format!(
        "fixed-year check at t = {t}, {replicates} replicates, seed {seed}, tolerance {} SE per check \
         ({} checks; no multiplicity correction, Bonferroni would use alpha/{})\n",
        a.sigma,
        report.checks.len(),
        report.checks.len()
    );
    for c in &report.checks {
        writeln!(
            summary,
            "{:<26} estimate {:>14.6} target {:>14.6} se {:>11.4e} z {:>6.2}  {}",
            c.name,
            c.estimate,
            c.target,
            c.std_error,
            c.z,
            if c.pass { "pass" } else { "FAIL" }
        )?;
    }
    let payload = json!({
        "command": "verify",
        "config": cfg,
        "seed": seed,
        "report": report,
        "bonferroni_note": format!(
            "{} checks at {} SE each; the family-wise false-failure rate is at most {} times the per-check rate",
            report.checks.len(), a.sigma, report.checks.len()
        ),
    });
    let stdout = match a.out.as_deref() {
        Some(p) => {
            fs::write(p, serde_json::to_string_pretty(&report)?)?;
            None
        }
        None => None,
    };
    let status = if report.all_pass() {
        Status::Ok
    } else {
        Status::VerificationFailure
    };
    Ok(ExitReport {
        status,
        summary,
        payload,
        stdout,
    })
}

/// Print a report the way the binary does and return the exit code.
pub fn finish(report: &ExitReport, wrote_out: bool) -> i32 {
    if !report.summary.is_empty() {
        eprintln!("{}", report.summary.trim_end());
    }
    let mut stdout = std::io::stdout().lock();
    if let Some(data) = &report.stdout {
        let _ = stdout.write_all(data.as_bytes());
    }
    if wrote_out || report.status == Status::VerificationFailure || report.stdout.is_none() {
        let _ = writeln!(stdout, "{}", report.to_json());
    }
    report.exit_code()
}

//! Monte Carlo checks of the closed-form `(N, S)` results at a fixed year.
//!
//! Each check compares a sample statistic over a replicate ensemble with its
//! closed form. Standard errors come from batch means, which works for every
//! statistic here including the nonlinear ones (correlation, J-Equation).

use serde::Serialize;

use crate::riskmodel::{self, risk_summary};
use crate::simulate::{replicate_fixed_year, Replicate, SimulationConfig, SimulationError};
use crate::stats::{batch_standard_error, RunningCovariance, RunningMoments};

/// Number of contiguous batches used for standard errors.
pub const BATCHES: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
    /// `|estimate - target| / std_error`.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub t: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Tolerance in standard errors.
    pub sigma: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn ns_cov(reps: &[Replicate]) -> RunningCovariance {
    let mut acc = RunningCovariance::default();
    reps.iter().for_each(|r| acc.push(r.n as f64, r.s));
    acc
}

fn sample_cov(acc: &RunningCovariance) -> Option<f64> {
    let n = acc.count() as f64;
    (n >= 2.0).then(|| acc.covariance() * n / (n - 1.0))
}

fn moments_of<F: Fn(&Replicate) -> f64>(reps: &[Replicate], f: F) -> RunningMoments {
    let mut acc = RunningMoments::default();
    reps.iter().for_each(|r| acc.push(f(r)));
    acc
}

fn stat_mean_n(reps: &[Replicate]) -> Option<f64> {
    Some(moments_of(reps, |r| r.n as f64).mean())
}

fn stat_dispersion(reps: &[Replicate]) -> Option<f64> {
    let m = moments_of(reps, |r| r.n as f64);
    let mean = m.mean();
    (mean > 0.0).then(|| m.sample_variance().map(|v| v / mean)).flatten()
}

fn stat_mean_s(reps: &[Replicate]) -> Option<f64> {
    Some(moments_of(reps, |r| r.s).mean())
}

fn stat_var_s(reps: &[Replicate]) -> Option<f64> {
    moments_of(reps, |r| r.s).sample_variance()
}

fn stat_cov_ns(reps: &[Replicate]) -> Option<f64> {
    sample_cov(&ns_cov(reps))
}

fn stat_cor_ns(reps: &[Replicate]) -> Option<f64> {
    ns_cov(reps).correlation()
}

fn stat_cov_xs(reps: &[Replicate]) -> Option<f64> {
    let mut acc = RunningCovariance::default();
    for r in reps {
        if let Some(x) = r.first_intensity {
            acc.push(x, r.s);
        }
    }
    sample_cov(&acc)
}

fn stat_j_equation(reps: &[Replicate]) -> Option<f64> {
    let rho = stat_cor_ns(reps)?;
    let phi = stat_dispersion(reps)?;
    riskmodel::j_equation(rho, phi).ok()
}

type Statistic = fn(&[Replicate]) -> Option<f64>;

/// Run every fixed-year check on `cfg.replicates` replicates at offset year `t`.
pub fn verify_fixed_year(cfg: &SimulationConfig, t: f64, sigma: f64) -> Result<VerifyReport, SimulationError> {
    let reps = replicate_fixed_year(cfg, t)?;
    let summary = risk_summary(&cfg.freq, &cfg.sev, t)?;
    let cor_target = summary.cor_ns;

    let checks: [(&'static str, Statistic, f64); 8] = [
        ("mean_n", stat_mean_n, summary.e_n),
        ("dispersion", stat_dispersion, summary.phi),
        ("wald_mean_s", stat_mean_s, summary.e_s),
        ("blackwell_girshick_var_s", stat_var_s, summary.var_s),
        ("cov_ns", stat_cov_ns, summary.cov_ns),
        ("cor_ns", stat_cor_ns, cor_target),
        ("cov_xs", stat_cov_xs, summary.var_x),
        ("j_equation", stat_j_equation, summary.j_squared),
    ];

    let checks = checks
        .into_iter()
        .map(|(name, stat, target)| {
            let estimate = stat(&reps).unwrap_or(f64::NAN);
            let std_error = batch_standard_error(&reps, BATCHES.min(reps.len() / 2).max(2), stat).unwrap_or(f64::NAN);
            let z = (estimate - target).abs() / std_error;
            CheckResult {
                name,
                estimate,
                target,
                std_error,
                z,
                pass: z <= sigma,
            }
        })
        .collect();

    Ok(VerifyReport {
        t,
        replicates: cfg.replicates,
        seed: cfg.seed,
        sigma,
        checks,
    })
}

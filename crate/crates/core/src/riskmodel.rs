//! Closed-form moments of the yearly aggregate `S = X_1 + ... + X_N`.
//!
//! All results assume `N` and the `X_i` are conditionally independent given
//! the year, with the `X_i` i.i.d.:
//!
//! * `E[S] = E[N] E[X]`
//! * `Var(S) = E[N] Var(X) + Var(N) E[X]^2`, which for Poisson `N` is `E[N] E[X^2]`
//! * `cov(N, S) = E[X] Var(N) = phi E[S]` with `phi = Var(N) / E[N]`
//! * `cor(N, S) = sqrt(phi) E[X] / sqrt(Var(X) + phi E[X]^2)`
//! * `cor(N, S)^2 / (phi (1 - cor(N, S)^2)) = E[X]^2 / Var(X) = J^2`

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::frequency::FrequencyModel;
use crate::horizon::Horizon;
use crate::severity::{Moments, SeverityFamily, SeverityModel};

/// Closed-form summary of `(N, S)` for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSummary {
    pub t: f64,
    pub e_n: f64,
    pub e_x: f64,
    pub e_s: f64,
    pub var_n: f64,
    pub var_x: f64,
    pub var_s: f64,
    pub cov_ns: f64,
    pub cor_ns: f64,
    pub phi: f64,
    pub j_squared: f64,
}

/// Count moments for a year: `(E[N], Var(N))`.
fn count_moments(freq: &FrequencyModel, t: f64) -> Result<(f64, f64), ModelError> {
    let lambda = freq.rate(t)?;
    Ok((lambda, lambda * freq.theoretical_dispersion()))
}

pub fn expected_aggregate(
    freq: &FrequencyModel,
    sev: &SeverityModel,
    t: f64,
) -> Result<f64, ModelError> {
    let (e_n, _) = count_moments(freq, t)?;
    Ok(e_n * sev.moments(t)?.mean)
}

/// Blackwell–Girshick: `E[N] Var(X) + Var(N) E[X]^2`.
pub fn variance_aggregate(
    freq: &FrequencyModel,
    sev: &SeverityModel,
    t: f64,
) -> Result<f64, ModelError> {
    let (e_n, var_n) = count_moments(freq, t)?;
    let m = sev.moments(t)?;
    Ok(e_n * m.variance + var_n * m.mean * m.mean)
}

/// Poisson shortcut: `E[N] E[X^2]`.
pub fn variance_aggregate_poisson(
    freq: &FrequencyModel,
    sev: &SeverityModel,
    t: f64,
) -> Result<f64, ModelError> {
    Ok(freq.rate(t)? * sev.moments(t)?.second_moment)
}

/// `E[N] (Var(X) + phi E[X]^2)`.
pub fn variance_aggregate_phi_form(e_n: f64, phi: f64, moments: &Moments) -> Result<f64, ModelError> {
    if !(e_n > 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "e_n",
            constraint: "> 0",
            value: e_n,
        });
    }
    if !(phi >= 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "phi",
            constraint: ">= 0",
            value: phi,
        });
    }
    if !(moments.variance >= 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "variance",
            constraint: ">= 0",
            value: moments.variance,
        });
    }
    Ok(e_n * (moments.variance + phi * moments.mean * moments.mean))
}

/// `cov(N, S) = E[X] Var(N)`.
pub fn cov_ns(freq: &FrequencyModel, sev: &SeverityModel, t: f64) -> Result<f64, ModelError> {
    let (_, var_n) = count_moments(freq, t)?;
    Ok(sev.moments(t)?.mean * var_n)
}

/// `cov(N, S) = phi E[S]`; the same quantity as [`cov_ns`] by a second route.
pub fn cov_ns_phi_form(freq: &FrequencyModel, sev: &SeverityModel, t: f64) -> Result<f64, ModelError> {
    let (e_n, var_n) = count_moments(freq, t)?;
    let phi = var_n / e_n;
    Ok(phi * expected_aggregate(freq, sev, t)?)
}

/// `cov(X, S) = Var(X)` for any single intensity `X` contributing to `S`.
pub fn cov_xs(sev: &SeverityModel, t: f64) -> Result<f64, ModelError> {
    Ok(sev.moments(t)?.variance)
}

/// `cor(X, S) = sqrt(Var(X) / Var(S))`.
pub fn cor_xs(freq: &FrequencyModel, sev: &SeverityModel, t: f64) -> Result<f64, ModelError> {
    let var_s = variance_aggregate(freq, sev, t)?;
    if !(var_s > 0.0) {
        return Err(ModelError::Degenerate("Var(S) is zero"));
    }
    Ok((cov_xs(sev, t)? / var_s).sqrt())
}

/// `cor(N, S)` in terms of dispersion: `sqrt(phi) E[X] / sqrt(Var(X) + phi E[X]^2)`.
pub fn cor_ns_phi_form(phi: f64, moments: &Moments) -> Result<f64, ModelError> {
    if !(phi > 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "phi",
            constraint: "> 0",
            value: phi,
        });
    }
    let denom = moments.variance + phi * moments.mean * moments.mean;
    if !(denom > 0.0) {
        return Err(ModelError::Degenerate("Var(X) + phi E[X]^2 is zero"));
    }
    Ok(phi.sqrt() * moments.mean / denom.sqrt())
}

/// `cor(N, S) = E[X] sqrt(Var(N) / Var(S))`.
///
/// In debug builds the dispersion form is evaluated too and the two must
/// agree to 1e-12 relative.
pub fn cor_ns(freq: &FrequencyModel, sev: &SeverityModel, t: f64) -> Result<f64, ModelError> {
    let (e_n, var_n) = count_moments(freq, t)?;
    let m = sev.moments(t)?;
    let var_s = e_n * m.variance + var_n * m.mean * m.mean;
    if !(var_n > 0.0 && var_s > 0.0) {
        return Err(ModelError::Degenerate("Var(N) or Var(S) is zero"));
    }
    let direct = m.mean * (var_n / var_s).sqrt();
    #[cfg(debug_assertions)]
    {
        let via_phi = cor_ns_phi_form(var_n / e_n, &m)?;
        debug_assert!(
            ((direct - via_phi) / direct).abs() <= 1e-12,
            "cor(N,S) routes disagree: {direct} vs {via_phi}"
        );
    }
    Ok(direct)
}

/// `rho^2 / (phi (1 - rho^2))`, which equals the severity `J^2` when
/// `rho = cor(N, S)` and `phi` is the count dispersion.
pub fn j_equation(rho: f64, phi: f64) -> Result<f64, ModelError> {
    if rho.abs() >= 1.0 || rho.is_nan() {
        return Err(ModelError::Degenerate(
            "|rho| = 1 implies zero severity variance",
        ));
    }
    if !(rho > 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "rho",
            constraint: "in (0, 1)",
            value: rho,
        });
    }
    if !(phi > 0.0) {
        return Err(ModelError::InvalidArgument {
            name: "phi",
            constraint: "> 0",
            value: phi,
        });
    }
    let rho2 = rho * rho;
    Ok(rho2 / (phi * (1.0 - rho2)))
}

pub fn risk_summary(freq: &FrequencyModel, sev: &SeverityModel, t: f64) -> Result<RiskSummary, ModelError> {
    let (e_n, var_n) = count_moments(freq, t)?;
    let m = sev.moments(t)?;
    let phi = var_n / e_n;
    Ok(RiskSummary {
        t,
        e_n,
        e_x: m.mean,
        e_s: expected_aggregate(freq, sev, t)?,
        var_n,
        var_x: m.variance,
        var_s: variance_aggregate(freq, sev, t)?,
        cov_ns: cov_ns(freq, sev, t)?,
        cor_ns: cor_ns(freq, sev, t)?,
        phi,
        j_squared: sev.j_squared(),
    })
}

/// Risk summary for a stationary Poisson year with severity driver `mu_t`
/// and rate `lambda_t`, i.e. one row of the distribution table.
pub fn table1_row(family: SeverityFamily, mu_t: f64, lambda_t: f64) -> Result<RiskSummary, ModelError> {
    let horizon = Horizon::new(0.0, 0.0)?;
    let sev = SeverityModel::stationary(family, mu_t, horizon)?;
    let freq = FrequencyModel::constant(lambda_t, horizon)?;
    risk_summary(&freq, &sev, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::RateLink;
    use crate::severity::TrendParams;
    use approx::assert_relative_eq;

    fn h() -> Horizon {
        Horizon::new(0.0, 100.0).unwrap()
    }

    fn sev(family: SeverityFamily, mu: f64) -> SeverityModel {
        SeverityModel::stationary(family, mu, h()).unwrap()
    }

    fn lam(lambda: f64) -> FrequencyModel {
        FrequencyModel::constant(lambda, h()).unwrap()
    }

    const LN: SeverityFamily = SeverityFamily::LogNormal { sigma: 0.5 };

    #[test]
    fn expected_aggregate_examples() {
        assert_eq!(expected_aggregate(&lam(10.0), &sev(SeverityFamily::Exponential, 2.0), 1.0).unwrap(), 20.0);
        assert_relative_eq!(
            expected_aggregate(&lam(20.0), &sev(LN, 1.0), 1.0).unwrap(),
            61.60433697836062,
            max_relative = 1e-12
        );
        let gpd = sev(SeverityFamily::Gpd { xi: 0.25 }, 0.5);
        for lambda in [0.5, 3.0, 41.0] {
            assert_relative_eq!(
                expected_aggregate(&lam(lambda), &gpd, 1.0).unwrap(),
                lambda / (0.5 * 0.75),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn variance_aggregate_examples() {
        assert_relative_eq!(
            variance_aggregate(&lam(20.0), &sev(LN, 1.0), 1.0).unwrap(),
            243.64987921406947,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            variance_aggregate(&lam(3.0), &sev(SeverityFamily::Uniform, 6.0), 1.0).unwrap(),
            36.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            variance_aggregate(&lam(1.0), &sev(SeverityFamily::Exponential, 1.0), 1.0).unwrap(),
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn phi_form_examples() {
        let m = sev(LN, 1.0).moments(1.0).unwrap();
        assert_relative_eq!(
            variance_aggregate_phi_form(20.0, 1.0, &m).unwrap(),
            243.64987921406947,
            max_relative = 1e-12
        );
        assert_eq!(variance_aggregate_phi_form(10.0, 0.0, &m).unwrap(), 10.0 * m.variance);
        let e = sev(SeverityFamily::Exponential, 1.0).moments(1.0).unwrap();
        assert_eq!(variance_aggregate_phi_form(10.0, 2.0, &e).unwrap(), 30.0);
        assert!(variance_aggregate_phi_form(0.0, 1.0, &e).is_err());
        assert!(variance_aggregate_phi_form(1.0, -0.1, &e).is_err());
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(cov_ns(&lam(10.0), &sev(SeverityFamily::Exponential, 2.0), 1.0).unwrap(), 20.0);
        assert_eq!(cov_ns(&lam(5.0), &sev(SeverityFamily::Uniform, 4.0), 1.0).unwrap(), 10.0);
        assert_eq!(cov_xs(&sev(SeverityFamily::Exponential, 2.0), 1.0).unwrap(), 4.0);
    }

    #[test]
    fn cor_xs_examples() {
        let e = sev(SeverityFamily::Exponential, 1.0);
        assert_relative_eq!(cor_xs(&lam(1.0), &e, 1.0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-14);
        let c: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&l| cor_xs(&lam(l), &e, 1.0).unwrap())
            .collect();
        assert!(c[0] > c[1] && c[1] > c[2] && c[2] > 0.0);
    }

    #[test]
    fn cor_ns_examples() {
        for (lambda, b0, b1) in [(1.0, 0.0, 0.0), (20.0, 1.0, 0.05), (300.0, -4.0, 0.2)] {
            let s = SeverityModel::new(LN, TrendParams::new(b0, b1), h()).unwrap();
            assert_relative_eq!(
                cor_ns(&lam(lambda), &s, 7.0).unwrap(),
                (-0.125f64).exp(),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(
            cor_ns(&lam(4.0), &sev(SeverityFamily::Uniform, 9.0), 2.0).unwrap(),
            3f64.sqrt() / 2.0,
            max_relative = 1e-12
        );
        let g = cor_ns(&lam(4.0), &sev(SeverityFamily::Gpd { xi: 0.0 }, 3.0), 2.0).unwrap();
        let e = cor_ns(&lam(4.0), &sev(SeverityFamily::Exponential, 3.0), 2.0).unwrap();
        assert_relative_eq!(g, 0.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(g, e, max_relative = 1e-12);
    }

    #[test]
    fn j_equation_examples() {
        assert_relative_eq!(j_equation(0.5f64.sqrt(), 1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(j_equation(3f64.sqrt() / 2.0, 1.0).unwrap(), 3.0, max_relative = 1e-12);
        let xi: f64 = 0.25;
        let rho = ((1.0 - 2.0 * xi) / (2.0 - 2.0 * xi)).sqrt();
        assert_relative_eq!(j_equation(rho, 1.0).unwrap(), 0.5, max_relative = 1e-12);
        assert!(matches!(j_equation(1.0, 1.0), Err(ModelError::Degenerate(_))));
        assert!(j_equation(0.5, 0.0).is_err());
    }

    #[test]
    fn table1_examples() {
        let r = table1_row(SeverityFamily::Exponential, 1.0, 1.0).unwrap();
        assert_eq!((r.e_s, r.var_s, r.j_squared), (1.0, 2.0, 1.0));
        assert_relative_eq!(r.cor_ns, 2f64.sqrt() / 2.0, max_relative = 1e-14);

        let r = table1_row(SeverityFamily::Gamma { shape: 2.0 }, 1.0, 1.0).unwrap();
        assert_eq!((r.e_s, r.var_s, r.j_squared), (2.0, 6.0, 2.0));
        assert_relative_eq!(r.cor_ns, 2.0 / 6f64.sqrt(), max_relative = 1e-14);

        let r = table1_row(SeverityFamily::LogNormal { sigma: 1.0 }, 0.0, 1.0).unwrap();
        assert_relative_eq!(r.e_s, 0.5f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(r.var_s, 2f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(r.cor_ns, (-0.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(r.j_squared, 0.5819767068693265, max_relative = 1e-12);

        assert!(table1_row(SeverityFamily::Gpd { xi: 0.7 }, 1.0, 1.0).is_err());
        assert!(table1_row(SeverityFamily::Uniform, 1.0, 0.0).is_err());
    }

    #[test]
    fn summary_invariants_under_log_link() {
        let f = FrequencyModel::new(1.0, 0.03, RateLink::Log, h()).unwrap();
        let s = SeverityModel::new(SeverityFamily::Gamma { shape: 1.7 }, TrendParams::new(2.0, 0.1), h()).unwrap();
        let r = risk_summary(&f, &s, 33.0).unwrap();
        assert_relative_eq!(r.e_s, r.e_n * r.e_x, max_relative = 1e-12);
        assert_relative_eq!(r.cov_ns, r.phi * r.e_s, max_relative = 1e-12);
        assert_relative_eq!(
            j_equation(r.cor_ns, r.phi).unwrap(),
            r.j_squared,
            max_relative = 1e-10
        );
    }
}

//! Time-parameterized severity (event intensity) distributions.
//!
//! Each family is driven by a linear trend `mu_t = beta0 + beta1 * t`:
//!
//! | family      | distribution of `X` at year `t`          |
//! |-------------|------------------------------------------|
//! | Uniform     | `Unif(0, mu_t)`                          |
//! | Gamma       | shape `theta`, scale `mu_t`              |
//! | Exponential | mean `mu_t`                              |
//! | LogNormal   | `ln X ~ Normal(mu_t, sigma)`             |
//! | GPD         | threshold 0, scale `1 / mu_t`, shape `xi` |
//!
//! For the GPD the driver is an inverse scale, so the mean falls as `mu_t`
//! grows. The log-normal driver is a location on the log scale and may take
//! any sign; every other family needs `mu_t > 0` across the horizon.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::horizon::{check_linear_positive, Horizon};
use crate::sampling::{gamma_unit_scale, open_unit, standard_normal};

/// Linear trend of the severity driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendParams {
    pub beta0: f64,
    pub beta1: f64,
}

impl TrendParams {
    pub fn new(beta0: f64, beta1: f64) -> Self {
        Self { beta0, beta1 }
    }

    pub fn stationary(level: f64) -> Self {
        Self::new(level, 0.0)
    }

    #[inline]
    pub fn driver(&self, t: f64) -> f64 {
        self.beta0 + self.beta1 * t
    }

    /// Multiply both coefficients by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.beta0, c * self.beta1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SeverityFamily {
    Uniform,
    Gamma { shape: f64 },
    Exponential,
    LogNormal { sigma: f64 },
    Gpd { xi: f64 },
}

impl SeverityFamily {
    pub const NAMES: [&'static str; 5] = ["uniform", "gamma", "exponential", "lognormal", "gpd"];

    pub fn name(&self) -> &'static str {
        match self {
            SeverityFamily::Uniform => "uniform",
            SeverityFamily::Gamma { .. } => "gamma",
            SeverityFamily::Exponential => "exponential",
            SeverityFamily::LogNormal { .. } => "lognormal",
            SeverityFamily::Gpd { .. } => "gpd",
        }
    }

    /// Build a family from its name and (where the family has one) shape.
    pub fn from_name(name: &str, shape: Option<f64>) -> Result<Self, String> {
        let need = |family: &str| {
            shape.ok_or_else(|| format!("family `{family}` requires a shape parameter"))
        };
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uniform" => Ok(SeverityFamily::Uniform),
            "gamma" => Ok(SeverityFamily::Gamma { shape: need("gamma")? }),
            "exponential" => Ok(SeverityFamily::Exponential),
            "lognormal" => Ok(SeverityFamily::LogNormal {
                sigma: need("lognormal")?,
            }),
            "gpd" => Ok(SeverityFamily::Gpd { xi: need("gpd")? }),
            other => Err(format!(
                "unknown severity family `{other}` (expected one of {})",
                Self::NAMES.join(", ")
            )),
        }
    }

    /// Shape parameter, if the family has one.
    pub fn shape(&self) -> Option<f64> {
        match *self {
            SeverityFamily::Gamma { shape } => Some(shape),
            SeverityFamily::LogNormal { sigma } => Some(sigma),
            SeverityFamily::Gpd { xi } => Some(xi),
            SeverityFamily::Uniform | SeverityFamily::Exponential => None,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            SeverityFamily::Gamma { shape } if !(shape > 0.0 && shape.is_finite()) => {
                Err(ModelError::InvalidShape {
                    family: "gamma",
                    constraint: "> 0",
                    value: shape,
                })
            }
            SeverityFamily::LogNormal { sigma } if !sigma.is_finite() || sigma < 0.0 => {
                Err(ModelError::InvalidShape {
                    family: "lognormal",
                    constraint: "> 0",
                    value: sigma,
                })
            }
            SeverityFamily::LogNormal { sigma: 0.0 } => Err(ModelError::Degenerate(
                "lognormal sigma = 0 has zero variance",
            )),
            SeverityFamily::Gpd { xi } if !(xi < 0.5) || !xi.is_finite() => {
                Err(ModelError::InvalidShape {
                    family: "gpd",
                    constraint: "< 0.5 for finite variance",
                    value: xi,
                })
            }
            _ => Ok(()),
        }
    }

    fn driver_is_scale(&self) -> bool {
        !matches!(self, SeverityFamily::LogNormal { .. })
    }
}

impl fmt::Display for SeverityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SeverityFamily::Uniform => write!(f, "Uniform"),
            SeverityFamily::Gamma { shape } => write!(f, "Gamma(theta={shape})"),
            SeverityFamily::Exponential => write!(f, "Exponential"),
            SeverityFamily::LogNormal { sigma } => write!(f, "LogNormal(sigma={sigma})"),
            SeverityFamily::Gpd { xi } => write!(f, "GPD(xi={xi})"),
        }
    }
}

/// First two moments of `X | T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
}

impl Moments {
    pub fn from_mean_variance(mean: f64, variance: f64) -> Self {
        Self {
            mean,
            variance,
            second_moment: variance + mean * mean,
        }
    }

    /// `E[X]^2 / Var(X)`.
    pub fn j_squared(&self) -> f64 {
        self.mean * self.mean / self.variance
    }
}

/// A severity family with a linear trend on its driver, validated over a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityModel {
    family: SeverityFamily,
    trend: TrendParams,
    horizon: Horizon,
}

impl SeverityModel {
    pub fn new(
        family: SeverityFamily,
        trend: TrendParams,
        horizon: Horizon,
    ) -> Result<Self, ModelError> {
        family.validate()?;
        if family.driver_is_scale() {
            check_linear_positive("severity driver", trend.beta0, trend.beta1, &horizon)?;
        } else if !trend.beta0.is_finite() || !trend.beta1.is_finite() {
            return Err(ModelError::NonFinite {
                what: "severity driver",
            });
        }
        Ok(Self {
            family,
            trend,
            horizon,
        })
    }

    /// Stationary model with driver `mu` at every year of the horizon.
    pub fn stationary(family: SeverityFamily, mu: f64, horizon: Horizon) -> Result<Self, ModelError> {
        Self::new(family, TrendParams::stationary(mu), horizon)
    }

    pub fn family(&self) -> SeverityFamily {
        self.family
    }

    pub fn trend(&self) -> TrendParams {
        self.trend
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn driver(&self, t: f64) -> Result<f64, ModelError> {
        self.horizon.check(t)?;
        Ok(self.trend.driver(t))
    }

    pub fn moments(&self, t: f64) -> Result<Moments, ModelError> {
        let mu = self.driver(t)?;
        let (mean, variance) = match self.family {
            SeverityFamily::Uniform => (mu / 2.0, mu * mu / 12.0),
            SeverityFamily::Gamma { shape } => (shape * mu, shape * mu * mu),
            SeverityFamily::Exponential => (mu, mu * mu),
            SeverityFamily::LogNormal { sigma } => {
                let s2 = sigma * sigma;
                ((mu + 0.5 * s2).exp(), s2.exp_m1() * (2.0 * mu + s2).exp())
            }
            SeverityFamily::Gpd { xi } => {
                let scale = 1.0 / mu;
                let mean = scale / (1.0 - xi);
                (mean, mean * mean / (1.0 - 2.0 * xi))
            }
        };
        Ok(Moments::from_mean_variance(mean, variance))
    }

    /// Squared reciprocal coefficient of variation, `E[X]^2 / Var(X)`.
    ///
    /// Depends only on the family shape, never on `t` or the trend.
    pub fn j_squared(&self) -> f64 {
        match self.family {
            SeverityFamily::Uniform => 3.0,
            SeverityFamily::Gamma { shape } => shape,
            SeverityFamily::Exponential => 1.0,
            SeverityFamily::LogNormal { sigma } => 1.0 / (sigma * sigma).exp_m1(),
            SeverityFamily::Gpd { xi } => 1.0 - 2.0 * xi,
        }
    }

    /// Quantile function for the families sampled by inversion
    /// (Uniform, Exponential, GPD); `None` for the others.
    pub fn inverse_cdf(&self, t: f64, u: f64) -> Result<Option<f64>, ModelError> {
        if !(0.0..1.0).contains(&u) {
            return Err(ModelError::InvalidArgument {
                name: "u",
                constraint: "in [0, 1)",
                value: u,
            });
        }
        let mu = self.driver(t)?;
        Ok(match self.family {
            SeverityFamily::Uniform => Some(mu * u),
            SeverityFamily::Exponential => Some(-mu * (-u).ln_1p()),
            SeverityFamily::Gpd { xi } => Some(gpd_quantile(1.0 / mu, xi, u)),
            SeverityFamily::Gamma { .. } | SeverityFamily::LogNormal { .. } => None,
        })
    }

    /// One intensity draw for year `t`.
    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64, ModelError> {
        let mu = self.driver(t)?;
        Ok(self.sample_with_driver(mu, rng))
    }

    /// Draw using a driver value already checked against the horizon.
    #[inline]
    pub(crate) fn sample_with_driver<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> f64 {
        match self.family {
            SeverityFamily::Uniform => mu * open_unit(rng),
            SeverityFamily::Exponential => -mu * open_unit(rng).ln(),
            SeverityFamily::Gpd { xi } => gpd_quantile(1.0 / mu, xi, open_unit(rng)),
            SeverityFamily::Gamma { shape } => mu * gamma_unit_scale(shape, rng),
            SeverityFamily::LogNormal { sigma } => (mu + sigma * standard_normal(rng)).exp(),
        }
    }
}

/// GPD quantile with threshold 0.
fn gpd_quantile(scale: f64, xi: f64, u: f64) -> f64 {
    if xi == 0.0 {
        -scale * (-u).ln_1p()
    } else {
        scale / xi * ((-xi) * (-u).ln_1p()).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn horizon() -> Horizon {
        Horizon::new(0.0, 100.0).unwrap()
    }

    fn model(family: SeverityFamily, beta0: f64, beta1: f64) -> SeverityModel {
        SeverityModel::new(family, TrendParams::new(beta0, beta1), horizon()).unwrap()
    }

    #[test]
    fn exponential_moments() {
        let m = model(SeverityFamily::Exponential, 2.0, 0.0).moments(1.0).unwrap();
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.variance, 4.0);
    }

    #[test]
    fn lognormal_moments() {
        let m = model(SeverityFamily::LogNormal { sigma: 0.5 }, 1.0, 0.0)
            .moments(3.0)
            .unwrap();
        assert_relative_eq!(m.mean, 1.125f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(m.mean, 3.080216848918031, max_relative = 1e-12);
        assert_relative_eq!(m.variance, (0.25f64.exp() - 1.0) * 2.25f64.exp(), max_relative = 1e-12);
        assert_relative_eq!(m.variance, 2.694758124344947, max_relative = 1e-12);
    }

    #[test]
    fn gpd_moments() {
        let m = model(SeverityFamily::Gpd { xi: 0.25 }, 0.5, 0.0).moments(1.0).unwrap();
        assert_relative_eq!(m.mean, 1.0 / (0.5 * 0.75), max_relative = 1e-14);
        assert_relative_eq!(m.variance, 1.0 / (0.25 * 0.5625 * 0.5), max_relative = 1e-14);
        assert_relative_eq!(m.variance, 14.222222222222221, max_relative = 1e-12);
    }

    #[test]
    fn gamma_one_equals_exponential_exactly() {
        for &(b0, b1, t) in &[(1.0, 0.0, 0.0), (2.5, 0.3, 17.0), (26.7, -0.1, 60.0)] {
            let g = model(SeverityFamily::Gamma { shape: 1.0 }, b0, b1).moments(t).unwrap();
            let e = model(SeverityFamily::Exponential, b0, b1).moments(t).unwrap();
            assert_eq!(g, e);
        }
    }

    #[test]
    fn j_squared_table_values() {
        assert_eq!(model(SeverityFamily::Uniform, 3.0, 0.2).j_squared(), 3.0);
        assert_eq!(model(SeverityFamily::Exponential, 7.0, -0.01).j_squared(), 1.0);
        assert_relative_eq!(
            model(SeverityFamily::LogNormal { sigma: 1.0 }, 0.0, 0.0).j_squared(),
            1.0 / (std::f64::consts::E - 1.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            model(SeverityFamily::LogNormal { sigma: 1.0 }, 0.0, 0.0).j_squared(),
            0.581977,
            max_relative = 1e-6
        );
    }

    #[test]
    fn shape_constraints() {
        let h = horizon();
        let t = TrendParams::stationary(1.0);
        assert!(SeverityModel::new(SeverityFamily::Gamma { shape: 0.0 }, t, h).is_err());
        assert!(SeverityModel::new(SeverityFamily::LogNormal { sigma: -1.0 }, t, h).is_err());
        assert!(matches!(
            SeverityModel::new(SeverityFamily::LogNormal { sigma: 0.0 }, t, h),
            Err(ModelError::Degenerate(_))
        ));
        let err = SeverityModel::new(SeverityFamily::Gpd { xi: 0.6 }, t, h).unwrap_err();
        assert!(err.to_string().contains("shape must be < 0.5 for finite variance"));
        assert!(SeverityModel::new(SeverityFamily::Gpd { xi: 0.5 }, t, h).is_err());
        assert!(SeverityModel::new(SeverityFamily::Gpd { xi: -0.3 }, t, h).is_ok());
    }

    #[test]
    fn driver_positivity_and_horizon() {
        let h = Horizon::years(60).unwrap();
        let bad = SeverityModel::new(SeverityFamily::Exponential, TrendParams::new(1.0, -0.1), h);
        assert!(matches!(bad, Err(ModelError::NonPositiveDriver { .. })));
        // Log-normal location may be negative.
        let ln = SeverityModel::new(
            SeverityFamily::LogNormal { sigma: 1.0 },
            TrendParams::new(-2.0, -0.1),
            h,
        );
        assert!(ln.is_ok());
        let m = model(SeverityFamily::Exponential, 1.0, 0.0);
        assert!(matches!(m.moments(101.0), Err(ModelError::OutsideHorizon { .. })));
        assert!(m.moments(-0.5).is_err());
    }

    #[test]
    fn inverse_cdf_examples() {
        let u = model(SeverityFamily::Uniform, 10.0, 0.0);
        assert_eq!(u.inverse_cdf(1.0, 0.5).unwrap(), Some(5.0));
        // GPD with scale 1 (driver 1) and xi = 0 is the unit exponential.
        let g = model(SeverityFamily::Gpd { xi: 0.0 }, 1.0, 0.0);
        let x = g.inverse_cdf(1.0, 1.0 - (-2.0f64).exp()).unwrap().unwrap();
        assert_relative_eq!(x, 2.0, max_relative = 1e-14);
        // Non-zero xi against the textbook form (scale/xi)((1-u)^-xi - 1).
        let g = model(SeverityFamily::Gpd { xi: 0.2 }, 0.5, 0.0);
        let x = g.inverse_cdf(1.0, 0.9).unwrap().unwrap();
        assert_relative_eq!(x, (2.0 / 0.2) * (0.1f64.powf(-0.2) - 1.0), max_relative = 1e-13);
        assert!(model(SeverityFamily::Gamma { shape: 2.0 }, 1.0, 0.0)
            .inverse_cdf(1.0, 0.5)
            .unwrap()
            .is_none());
        assert!(u.inverse_cdf(1.0, 1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_given_rng_state() {
        let m = model(SeverityFamily::Gamma { shape: 2.5 }, 3.0, 0.1);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for t in 0..20 {
            assert_eq!(m.sample(t as f64, &mut a).unwrap(), m.sample(t as f64, &mut b).unwrap());
        }
    }

    #[test]
    fn family_names_round_trip() {
        for name in SeverityFamily::NAMES {
            let fam = SeverityFamily::from_name(name, Some(0.3)).unwrap();
            assert_eq!(fam.name(), name);
        }
        assert!(SeverityFamily::from_name("gamma", None).is_err());
        assert!(SeverityFamily::from_name("weibull", Some(1.0)).is_err());
        assert_eq!(
            SeverityFamily::from_name("Log-Normal", Some(0.5)).unwrap(),
            SeverityFamily::LogNormal { sigma: 0.5 }
        );
    }
}

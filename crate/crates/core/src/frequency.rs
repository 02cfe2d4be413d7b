//! Time-varying Poisson count models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::horizon::{check_linear_positive, Horizon};
use crate::sampling;

/// How the linear predictor `alpha0 + alpha1 * t` maps to the Poisson rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateLink {
    /// `lambda_t = exp(alpha0 + alpha1 * t)`
    Log,
    /// `lambda_t = alpha0 + alpha1 * t`
    Identity,
}

/// `N_t ~ Poisson(lambda_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModel {
    alpha0: f64,
    alpha1: f64,
    link: RateLink,
    horizon: Horizon,
}

impl FrequencyModel {
    pub fn new(alpha0: f64, alpha1: f64, link: RateLink, horizon: Horizon) -> Result<Self, ModelError> {
        match link {
            RateLink::Identity => check_linear_positive("poisson rate", alpha0, alpha1, &horizon)?,
            RateLink::Log => {
                if !alpha0.is_finite() || !alpha1.is_finite() {
                    return Err(ModelError::NonFinite { what: "poisson rate" });
                }
                for t in [horizon.start, horizon.end] {
                    let rate = (alpha0 + alpha1 * t).exp();
                    if !(rate > 0.0 && rate.is_finite()) {
                        return Err(ModelError::NonPositiveDriver {
                            what: "poisson rate",
                            t,
                            value: rate,
                        });
                    }
                }
            }
        }
        Ok(Self {
            alpha0,
            alpha1,
            link,
            horizon,
        })
    }

    /// Constant rate `lambda` over the horizon (identity link).
    pub fn constant(lambda: f64, horizon: Horizon) -> Result<Self, ModelError> {
        Self::new(lambda, 0.0, RateLink::Identity, horizon)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn link(&self) -> RateLink {
        self.link
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// `lambda_t`, which is both `E[N | t]` and `Var(N | t)`.
    pub fn rate(&self, t: f64) -> Result<f64, ModelError> {
        self.horizon.check(t)?;
        let eta = self.alpha0 + self.alpha1 * t;
        Ok(match self.link {
            RateLink::Log => eta.exp(),
            RateLink::Identity => eta,
        })
    }

    pub fn sample_count<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<u64, ModelError> {
        let lambda = self.rate(t)?;
        Ok(sampling::poisson(lambda, rng))
    }

    /// `Var(N) / E[N]`, which is 1 for every Poisson model at every year.
    pub fn theoretical_dispersion(&self) -> f64 {
        1.0
    }

    /// Dispersion under the convention that subtracts one (`Var/E - 1`),
    /// which is 0 for Poisson counts.
    pub fn mailier_dispersion(&self) -> f64 {
        self.theoretical_dispersion() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h() -> Horizon {
        Horizon::new(0.0, 100.0).unwrap()
    }

    #[test]
    fn rate_examples() {
        let m = FrequencyModel::new(0.0, 0.0, RateLink::Log, h()).unwrap();
        assert_eq!(m.rate(7.0).unwrap(), 1.0);
        let m = FrequencyModel::new(1.0, 0.1, RateLink::Log, h()).unwrap();
        assert_relative_eq!(m.rate(10.0).unwrap(), 2.0f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(m.rate(10.0).unwrap(), 7.38906, max_relative = 1e-6);
        let m = FrequencyModel::new(20.0, 0.5, RateLink::Identity, h()).unwrap();
        assert_eq!(m.rate(60.0).unwrap(), 50.0);
    }

    #[test]
    fn identity_link_must_stay_positive() {
        let err = FrequencyModel::new(1.0, -0.1, RateLink::Identity, Horizon::years(60).unwrap())
            .unwrap_err();
        assert_eq!(
            err,
            ModelError::NonPositiveDriver {
                what: "poisson rate",
                t: 10.0,
                value: 1.0 - 0.1 * 10.0
            }
        );
        assert!(FrequencyModel::new(-1.0, 0.0, RateLink::Log, h()).is_ok());
        assert!(FrequencyModel::new(800.0, 0.0, RateLink::Log, h()).is_err());
    }

    #[test]
    fn outside_horizon_is_rejected() {
        let m = FrequencyModel::constant(3.0, Horizon::years(10).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(m.rate(11.0).is_err());
        assert!(m.sample_count(0.0, &mut rng).is_err());
    }

    #[test]
    fn tiny_rate_gives_zero_counts() {
        let m = FrequencyModel::constant(1e-9, h()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!((0..10_000).all(|_| m.sample_count(1.0, &mut rng).unwrap() == 0));
    }

    #[test]
    fn dispersion_conventions() {
        let log = FrequencyModel::new(1.0, 0.02, RateLink::Log, h()).unwrap();
        let id = FrequencyModel::new(20.0, 0.5, RateLink::Identity, h()).unwrap();
        for m in [log, id] {
            assert_eq!(m.theoretical_dispersion(), 1.0);
            assert_eq!(m.mailier_dispersion(), 0.0);
        }
    }
}

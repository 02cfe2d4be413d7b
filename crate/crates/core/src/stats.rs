//! Small numerically careful accumulators shared by the estimators.

use statrs::distribution::{ContinuousCDF, Normal};

/// Running mean and population variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Denominator `n`.
    pub fn population_variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    /// Denominator `n - 1`.
    pub fn sample_variance(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.m2 / (self.n - 1) as f64)
    }
}

/// Running co-moments of pairs, for Pearson correlation.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningCovariance {
    n: u64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl RunningCovariance {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        let dy = y - self.mean_y;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Population covariance.
    pub fn covariance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.c_xy / self.n as f64
        }
    }

    /// Pearson correlation; `None` with fewer than two pairs or when either
    /// margin has zero variance.
    pub fn correlation(&self) -> Option<f64> {
        if self.n < 2 || self.m2_x <= 0.0 || self.m2_y <= 0.0 {
            return None;
        }
        Some((self.c_xy / (self.m2_x * self.m2_y).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Pearson correlation of two equal-length slices.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "pearson: length mismatch");
    let mut acc = RunningCovariance::default();
    for (&x, &y) in xs.iter().zip(ys) {
        acc.push(x, y);
    }
    acc.correlation()
}

/// Upper `p` quantile of the standard normal.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Standard error of a statistic by batch means: split `data` into `batches`
/// contiguous blocks, evaluate `stat` on each, and return
/// `sd(batch values) / sqrt(batches)`.
pub fn batch_standard_error<T, F>(data: &[T], batches: usize, stat: F) -> Option<f64>
where
    F: Fn(&[T]) -> Option<f64>,
{
    if batches < 2 || data.len() < batches {
        return None;
    }
    let size = data.len() / batches;
    let mut acc = RunningMoments::default();
    for chunk in data.chunks_exact(size).take(batches) {
        acc.push(stat(chunk)?);
    }
    Some((acc.sample_variance()? / batches as f64).sqrt())
}

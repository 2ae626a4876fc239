use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numerics::{derive_seed, fit_line, ks_statistic, seeded_rng, LineFit, Rng64, RunningStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum StepLaw {
    /// `+1` or `-1` with probability one half.
    Rademacher,
    /// Uniform on `[-h, h]`.
    Uniform { half_width: f64 },
    Gaussian { sigma: f64 },
}

impl StepLaw {
    pub fn variance(&self) -> f64 {
        match *self {
            StepLaw::Rademacher => 1.0,
            StepLaw::Uniform { half_width } => half_width * half_width / 3.0,
            StepLaw::Gaussian { sigma } => sigma * sigma,
        }
    }

    fn draw(&self, rng: &mut Rng64) -> f64 {
        match *self {
            StepLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepLaw::Uniform { half_width } => rng.random_range(-half_width..half_width),
            StepLaw::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
        }
    }

    /// Sum of `n` independent steps.
    fn sum(&self, n: u64, rng: &mut Rng64) -> f64 {
        match self {
            // 64 signs per random word
            StepLaw::Rademacher => {
                let mut s = 0i64;
                let mut left = n;
                while left > 0 {
                    let k = left.min(64);
                    let w: u64 = rng.random();
                    let w = if k == 64 { w } else { w & ((1u64 << k) - 1) };
                    s += 2 * w.count_ones() as i64 - k as i64;
                    left -= k;
                }
                s as f64
            }
            _ => (0..n).map(|_| self.draw(rng)).sum(),
        }
    }
}

/// Zero-mean step law in `d` dimensions with independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    pub dim: usize,
    pub law: StepLaw,
}

impl StepDistribution {
    pub fn new(dim: usize, law: StepLaw) -> Self {
        Self { dim, law }
    }

    pub fn rademacher() -> Self {
        Self::new(1, StepLaw::Rademacher)
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let s2 = self.law.variance();
        (0..self.dim).map(|i| (0..self.dim).map(|j| if i == j { s2 } else { 0.0 }).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltStatistics {
    pub t: f64,
    pub eps: f64,
    pub steps: u64,
    pub trials: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Expected covariance `T sigma^2`.
    pub target_variance: f64,
    /// Kolmogorov-Smirnov distance of the first coordinate to `N(0, T sigma^2)`.
    pub ks_distance: f64,
    pub seed: u64,
}

impl CltStatistics {
    pub fn variance_rel_error(&self) -> f64 {
        (self.covariance[0][0] / self.target_variance - 1.0).abs()
    }
}

/// Statistics of `eps^{1/2} sum_{i <= T / eps} v_i` over independent trials.
pub fn clt_statistics(dist: &StepDistribution, t: f64, eps: f64, trials: usize, seed: u64) -> Result<CltStatistics> {
    let s2 = dist.law.variance();
    if !(s2 > 0.0) || !s2.is_finite() {
        return Err(Error::Degenerate("step law has zero variance".into()));
    }
    if !(t > 0.0 && eps > 0.0) || trials < 2 || dist.dim == 0 {
        return Err(Error::OutOfRange(format!("T = {t}, eps = {eps}, trials = {trials}")));
    }
    let steps = (t / eps).floor() as u64;
    let d = dist.dim;
    let scale = eps.sqrt();
    let shards = 16usize;
    let samples: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(derive_seed(seed, s as u64));
            let lo = trials * s / shards;
            let hi = trials * (s + 1) / shards;
            let mut out = Vec::with_capacity((hi - lo) * d);
            for _ in lo..hi {
                for _ in 0..d {
                    out.push(scale * dist.law.sum(steps, &mut rng));
                }
            }
            out
        })
        .collect();
    let xs: Vec<&[f64]> = samples.iter().flat_map(|v| v.chunks(d)).collect();
    let n = xs.len() as f64;
    let mean: Vec<f64> = (0..d).map(|i| xs.iter().map(|x| x[i]).sum::<f64>() / n).collect();
    let covariance = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| xs.iter().map(|x| (x[i] - mean[i]) * (x[j] - mean[j])).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect();
    let target_variance = t * s2;
    let normal = Normal::new(0.0, target_variance.sqrt()).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let first: Vec<f64> = xs.iter().map(|x| x[0]).collect();
    let ks_distance = ks_statistic(&first, |x| normal.cdf(x));
    Ok(CltStatistics { t, eps, steps, trials, mean, covariance, target_variance, ks_distance, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltLinearity {
    pub times: Vec<f64>,
    pub variances: Vec<f64>,
    pub fit: LineFit,
    pub sigma2: f64,
}

/// Variance of the rescaled sum at several `T`, with a straight-line fit.
pub fn clt_variance_vs_time(dist: &StepDistribution, times: &[f64], eps: f64, trials: usize, seed: u64) -> Result<CltLinearity> {
    let mut variances = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        variances.push(clt_statistics(dist, t, eps, trials, derive_seed(seed, k as u64))?.covariance[0][0]);
    }
    Ok(CltLinearity { times: times.to_vec(), fit: fit_line(times, &variances), variances, sigma2: dist.law.variance() })
}

/// Running mean and variance of single steps, for checking a law's moments.
pub fn step_moments(law: &StepLaw, n: u64, seed: u64) -> RunningStats {
    let mut rng = seeded_rng(seed);
    let mut st = RunningStats::new();
    for _ in 0..n {
        st.push(law.draw(&mut rng));
    }
    st
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_steps_give_unit_variance() {
        let r = clt_statistics(&StepDistribution::rademacher(), 1.0, 1e-4, 10_000, 7).unwrap();
        assert_eq!(r.steps, 10_000);
        assert!(r.variance_rel_error() < 0.05, "{r:?}");
        assert!(r.mean[0].abs() < 0.05);
        assert!(r.ks_distance < 0.02, "{}", r.ks_distance);
    }

    #[test]
    fn zero_variance_is_rejected() {
        let d = StepDistribution::new(1, StepLaw::Gaussian { sigma: 0.0 });
        assert!(matches!(clt_statistics(&d, 1.0, 1e-3, 100, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn uniform_law_moments() {
        let st = step_moments(&StepLaw::Uniform { half_width: 3f64.sqrt() }, 200_000, 3);
        assert!(st.mean.abs() < 0.01);
        assert!((st.variance() - 1.0).abs() < 0.01);
    }

    #[test]
    fn two_dimensional_covariance_is_diagonal() {
        let d = StepDistribution::new(2, StepLaw::Uniform { half_width: 1.0 });
        let r = clt_statistics(&d, 2.0, 1e-3, 4000, 11).unwrap();
        assert!((r.covariance[0][0] / (2.0 / 3.0) - 1.0).abs() < 0.08);
        assert!(r.covariance[0][1].abs() < 0.05);
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derive_seed, seeded_rng, Rng64, RunningStats};

/// Stationary finite-state Markov chain of scalar velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovVelocities {
    pub values: Vec<f64>,
    /// Row-stochastic transition matrix.
    pub transition: Vec<Vec<f64>>,
}

impl MarkovVelocities {
    pub fn new(values: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.len();
        if k == 0 || transition.len() != k || transition.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, got: transition.len() });
        }
        for row in &transition {
            if row.iter().any(|&p| !(p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::OutOfRange("transition rows must be probability vectors".into()));
            }
        }
        Ok(Self { values, transition })
    }

    /// `+1 / -1` chain that flips sign with probability `q`.
    pub fn two_state(q: f64) -> Result<Self> {
        Self::new(vec![1.0, -1.0], vec![vec![1.0 - q, q], vec![q, 1.0 - q]])
    }

    /// Stationary law by power iteration.
    pub fn stationary(&self) -> Vec<f64> {
        let k = self.values.len();
        let mut pi = vec![1.0 / k as f64; k];
        for _ in 0..100_000 {
            let mut next = vec![0.0; k];
            for (i, p) in pi.iter().enumerate() {
                for (j, q) in self.transition[i].iter().enumerate() {
                    next[j] += p * q;
                }
            }
            // average with the previous iterate so periodic chains converge too
            let next: Vec<f64> = next.iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect();
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-15 {
                break;
            }
        }
        pi
    }

    pub fn mean(&self) -> f64 {
        self.stationary().iter().zip(&self.values).map(|(p, v)| p * v).sum()
    }

    /// Exact `R(k)` for `k = 0..=max_lag` from powers of the transition matrix.
    pub fn exact_autocorrelation(&self, max_lag: usize) -> Vec<f64> {
        let pi = self.stationary();
        let m = self.mean();
        let c: Vec<f64> = self.values.iter().map(|v| v - m).collect();
        // w_k = P^k c
        let mut w = c.clone();
        let mut out = Vec::with_capacity(max_lag + 1);
        for _ in 0..=max_lag {
            out.push(pi.iter().zip(&c).zip(&w).map(|((p, a), b)| p * a * b).sum());
            w = self.transition.iter().map(|row| row.iter().zip(&w).map(|(p, x)| p * x).sum()).collect();
        }
        out
    }

    fn start(&self, rng: &mut Rng64) -> usize {
        pick(&self.stationary(), rng)
    }

    fn step(&self, state: usize, rng: &mut Rng64) -> usize {
        pick(&self.transition[state], rng)
    }
}

fn pick(p: &[f64], rng: &mut Rng64) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, q) in p.iter().enumerate() {
        acc += q;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKuboConfig {
    /// Steps per batch in the rescaled-sum estimator.
    pub batch_len: usize,
    pub batches: usize,
    /// Length of the single path used for the empirical `R(k)`.
    pub path_len: usize,
    pub max_lag: usize,
    /// Agreement tolerance between the two estimators.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GreenKuboConfig {
    fn default() -> Self {
        Self { batch_len: 1000, batches: 10_000, path_len: 4_000_000, max_lag: 200, tolerance: 0.05, seed: 2024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenKuboReport {
    /// `Var(S_N) / N` over independent stationary batches.
    pub d_rescaled_sum: f64,
    pub d_rescaled_sum_std_error: f64,
    /// `R(0) + 2 sum_{k >= 1} R(k)` from empirical correlations.
    pub d_correlation_sum: f64,
    /// Same sum with the exact `R(k)` of the chain.
    pub d_exact: f64,
    pub empirical_r: Vec<f64>,
    pub agree: bool,
    pub seed: u64,
}

/// Diffusion coefficient `D = sum_k R(k)` of a stationary velocity chain by two estimators.
pub fn green_kubo_correlated(chain: &MarkovVelocities, cfg: &GreenKuboConfig) -> Result<GreenKuboReport> {
    let exact = chain.exact_autocorrelation(cfg.max_lag.max(16) * 4);
    let (d_exact, summable) = partial_sum_converged(&exact);
    if !summable {
        return Err(Error::Convergence(format!(
            "autocorrelation partial sums do not settle within lag {}",
            exact.len() - 1
        )));
    }
    let m = chain.mean();

    let mut batch = RunningStats::new();
    let mut rng = seeded_rng(derive_seed(cfg.seed, 0));
    for _ in 0..cfg.batches {
        let mut s = chain.start(&mut rng);
        let mut sum = 0.0;
        for _ in 0..cfg.batch_len {
            sum += chain.values[s] - m;
            s = chain.step(s, &mut rng);
        }
        batch.push(sum * sum / cfg.batch_len as f64);
    }

    let mut rng = seeded_rng(derive_seed(cfg.seed, 1));
    let mut s = chain.start(&mut rng);
    let path: Vec<f64> = (0..cfg.path_len)
        .map(|_| {
            let v = chain.values[s] - m;
            s = chain.step(s, &mut rng);
            v
        })
        .collect();
    let empirical_r: Vec<f64> = (0..=cfg.max_lag)
        .map(|k| {
            let n = path.len() - k;
            path[..n].iter().zip(&path[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
        })
        .collect();
    let d_corr = empirical_r[0] + 2.0 * empirical_r[1..].iter().sum::<f64>();
    let d_sum = batch.mean;
    let agree = (d_sum - d_corr).abs() <= cfg.tolerance * d_corr.abs().max(d_sum.abs());
    Ok(GreenKuboReport {
        d_rescaled_sum: d_sum,
        d_rescaled_sum_std_error: batch.std_error(),
        d_correlation_sum: d_corr,
        d_exact,
        empirical_r,
        agree,
        seed: cfg.seed,
    })
}

/// Two-sided sum of `R` given for `k >= 0`, and whether the tail has died out.
fn partial_sum_converged(r: &[f64]) -> (f64, bool) {
    let two_sided = |n: usize| r[0] + 2.0 * r[1..n].iter().sum::<f64>();
    let full = two_sided(r.len());
    let half = two_sided(r.len() / 2);
    let ok = full.is_finite() && (full - half).abs() <= 1e-6 * full.abs().max(r[0].abs());
    (full, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GreenKuboConfig {
        GreenKuboConfig { batch_len: 500, batches: 4000, path_len: 500_000, max_lag: 60, ..Default::default() }
    }

    #[test]
    fn memoryless_chain_gives_step_variance() {
        let r = green_kubo_correlated(&MarkovVelocities::two_state(0.5).unwrap(), &small()).unwrap();
        assert!((r.d_exact - 1.0).abs() < 1e-12);
        assert!((r.d_rescaled_sum - 1.0).abs() < 0.06);
        assert!((r.d_correlation_sum - 1.0).abs() < 0.06);
    }

    #[test]
    fn two_state_chain_matches_geometric_series() {
        for q in [0.2, 0.35] {
            let oracle = (1.0 - q) / q;
            let r = green_kubo_correlated(&MarkovVelocities::two_state(q).unwrap(), &small()).unwrap();
            assert!((r.d_exact / oracle - 1.0).abs() < 1e-10);
            assert!((r.d_rescaled_sum / oracle - 1.0).abs() < 0.06, "{r:?}");
            assert!((r.d_correlation_sum / oracle - 1.0).abs() < 0.06, "{r:?}");
        }
    }

    #[test]
    fn stuck_chain_is_not_summable() {
        let chain = MarkovVelocities::two_state(1e-7).unwrap();
        assert!(matches!(green_kubo_correlated(&chain, &small()), Err(Error::Convergence(_))));
    }

    #[test]
    fn stationary_law_of_asymmetric_chain() {
        let c = MarkovVelocities::new(vec![1.0, -1.0], vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let pi = c.stationary();
        assert!((pi[0] - 0.75).abs() < 1e-12);
    }
}

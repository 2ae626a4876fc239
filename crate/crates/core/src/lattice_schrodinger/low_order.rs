//! Second-order Wigner terms at `xi = 0` in the kinetic scaling `lambda^2 t = T`.
//!
//! With `psi_0 = delta` and the observable `J(v) = sin^2 v` in `d = 1`:
//!
//! * gain `int J E|psi^(1)^|^2` tends to `T int J sigma = 2T / pi`, where
//!   `sigma(v) = int 2 pi delta(w(v) - w(k)) dk = 1 / |sin v|` for `w = 2 - 2 cos`;
//! * loss `int J 2 Re E[conj(psi^(0)^) psi^(2)^]` tends to minus the same;
//! * the unweighted sum `|psi^(1)|^2 + 2 Re <psi^(0), psi^(2)>` is the
//!   `lambda^2` part of `|psi_t|^2` and vanishes for every realization.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::duhamel::Expander;
use super::hamiltonian::Hamiltonian;
use super::lattice::{BoxFft, LatticeBox, PotentialLaw, RandomPotential, WaveFunction};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, RunningStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowOrderConfig {
    pub side: usize,
    pub big_t: f64,
    pub lambdas: Vec<f64>,
    pub realizations: usize,
    pub law: PotentialLaw,
    pub seed: u64,
    /// Fail when the gain estimate's relative standard error exceeds this.
    pub variance_cap: f64,
}

impl Default for LowOrderConfig {
    fn default() -> Self {
        Self {
            side: 512,
            big_t: 1.0,
            lambdas: vec![0.5, 0.35, 0.25],
            realizations: 2000,
            law: PotentialLaw::Bernoulli,
            seed: 2024,
            variance_cap: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowOrderRow {
    pub lambda: f64,
    pub t: f64,
    pub gain: f64,
    pub gain_std_error: f64,
    /// Exact disorder average of the gain on the box.
    pub gain_box: f64,
    pub gain_limit: f64,
    pub gain_gap: f64,
    pub loss: f64,
    pub loss_std_error: f64,
    /// `|E int J W_{1,0}|` over the realizations.
    pub first_order: f64,
    pub first_order_std_error: f64,
    /// Largest `|int (W_{1,1} + W_{2,0} + W_{0,2})(0, v) dv|` over realizations.
    pub norm_sum: f64,
    pub norm_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowOrderReport {
    pub config: LowOrderConfig,
    pub rows: Vec<LowOrderRow>,
    pub gap_decreasing: bool,
    pub norm_conserved: bool,
}

fn q_t_sq(t: f64, a: f64) -> f64 {
    // |(e^{ita} - 1) / (ia)|^2 = (2 sin(ta/2) / a)^2
    if (t * a).abs() < 1e-6 {
        t * t
    } else {
        (2.0 * (0.5 * t * a).sin() / a).powi(2)
    }
}

pub fn low_order_wigner(cfg: &LowOrderConfig) -> Result<LowOrderReport> {
    let lat = LatticeBox::new(1, cfg.side)?;
    if cfg.realizations < 2 {
        return Err(Error::OutOfRange("need at least two realizations".into()));
    }
    let n = lat.sites();
    let fft = BoxFft::new(lat);
    let omega: Vec<f64> = (0..n).map(|k| lat.free_symbol(k)).collect();
    let jv: Vec<f64> = (0..n).map(|k| lat.momentum(k)[0].sin().powi(2)).collect();
    let psi0 = WaveFunction::delta(lat, 0);
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let t = cfg.big_t / (lambda * lambda);
        let per: Vec<(f64, f64, Complex64, f64)> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                let pot = RandomPotential::sample(&lat, cfg.law, derive_seed(cfg.seed, r as u64));
                let h = Hamiltonian { lattice: lat, lambda, potential: pot };
                let ex = Expander::new(&h, &psi0.amp, 16);
                let mut terms = ex.terms_at(2, t);
                let mut p2 = terms.pop().unwrap();
                let mut p1 = terms.pop().unwrap();
                let mut p0 = terms.pop().unwrap();
                let norm_sum = p1.iter().map(|z| z.norm_sqr()).sum::<f64>()
                    + 2.0 * p0.iter().zip(&p2).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
                fft.forward(&mut p0);
                fft.forward(&mut p1);
                fft.forward(&mut p2);
                let nn = n as f64;
                let gain = (0..n).map(|k| jv[k] * p1[k].norm_sqr()).sum::<f64>() / nn;
                let loss = (0..n).map(|k| jv[k] * 2.0 * (p0[k].conj() * p2[k]).re).sum::<f64>() / nn;
                let w10 = (0..n).map(|k| jv[k] * p0[k].conj() * p1[k]).sum::<Complex64>() / nn;
                (gain, loss, w10, norm_sum)
            })
            .collect();
        let mut g = RunningStats::new();
        let mut l = RunningStats::new();
        let mut w_re = RunningStats::new();
        let mut w_im = RunningStats::new();
        let mut norm_sum: f64 = 0.0;
        for (a, b, c, d) in &per {
            g.push(*a);
            l.push(*b);
            w_re.push(c.re);
            w_im.push(c.im);
            norm_sum = norm_sum.max(d.abs());
        }
        if g.std_error() > cfg.variance_cap * g.mean.abs() {
            return Err(Error::VarianceCap { rel_err: g.std_error() / g.mean.abs(), cap: cfg.variance_cap });
        }
        let m2 = cfg.law.moment(2);
        let gain_box = lambda * lambda * m2 / (n * n) as f64
            * (0..n).map(|k| jv[k] * omega.iter().map(|w| q_t_sq(t, omega[k] - w)).sum::<f64>()).sum::<f64>();
        let gain_limit = cfg.big_t * m2 * 2.0 / PI;
        rows.push(LowOrderRow {
            lambda,
            t,
            gain: g.mean,
            gain_std_error: g.std_error(),
            gain_box,
            gain_limit,
            gain_gap: (g.mean - gain_limit).abs() / gain_limit,
            loss: l.mean,
            loss_std_error: l.std_error(),
            first_order: (w_re.mean.powi(2) + w_im.mean.powi(2)).sqrt(),
            first_order_std_error: (w_re.std_error().powi(2) + w_im.std_error().powi(2)).sqrt(),
            norm_sum,
            norm_tolerance: 1e-2 * cfg.big_t,
        });
    }
    let gap_decreasing = rows.windows(2).all(|w| w[1].gain_gap < w[0].gain_gap);
    let norm_conserved = rows.iter().all(|r| r.norm_sum <= r.norm_tolerance);
    Ok(LowOrderReport { config: cfg.clone(), rows, gap_decreasing, norm_conserved })
}

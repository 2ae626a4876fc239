//! Values of pairing graphs `Val(pi)` on the lattice.
//!
//! The `alpha` and `beta` integrals of the resolvent representation are done
//! in closed form: with all poles on one side they turn into time-simplex
//! integrals, which are divided differences of `exp(-i t w)` at the
//! (renormalized) energies. What is left is the momentum integral, done by
//! importance-sampled Monte Carlo. The initial state is a lattice delta
//! function, so `|psi_0^(p)|^2 = 1` in the normalized momentum measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::self_energy::{Model, SelfEnergy};
use super::shell::LatticeShell;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, gauss_legendre, seeded_rng, simplex_integral, ComplexStats, GaussLegendre};
use crate::permutation_graphs::{build_matrix, MomentumMatrix, Permutation};
use crate::types::FeynmanValue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValConfig {
    /// Lattice dimension, 1 to 3.
    pub dim: usize,
    pub lambda: f64,
    pub t: f64,
    /// Regularization of the self-energy; the contour shift itself cancels
    /// against the `exp(2 eta t)` prefactor.
    pub eta: f64,
    pub renormalized: bool,
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
    /// Mix uniform sampling with sampling on the energy shell of the last momentum.
    pub importance: bool,
    /// Fail when the relative standard error exceeds this value.
    pub max_rel_error: Option<f64>,
}

impl ValConfig {
    pub fn kinetic(lambda: f64, samples: u64, seed: u64) -> Self {
        Self {
            dim: 3,
            lambda,
            t: 1.0 / (lambda * lambda),
            eta: lambda * lambda,
            renormalized: true,
            samples,
            seed,
            shards: 16,
            importance: true,
            max_rel_error: None,
        }
    }
}

/// Energy-to-propagator map shared by the Monte Carlo and time-domain evaluators.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    pub lambda: f64,
    self_energy: Option<SelfEnergy>,
}

impl PropagatorTable {
    pub fn new(dim: usize, lambda: f64, eta: f64, renormalized: bool) -> Result<Self> {
        let self_energy = if renormalized { Some(SelfEnergy::born(Model::Lattice { dim }, eta)?) } else { None };
        Ok(Self { lambda, self_energy })
    }

    /// Decaying propagator energy `e + lambda^2 conj(theta(e))` (imaginary part `<= 0`).
    pub fn omega_bar(&self, e: f64) -> Complex64 {
        match &self.self_energy {
            Some(se) => Complex64::new(e, 0.0) + self.lambda * self.lambda * se.theta_at(e).conj(),
            None => Complex64::new(e, 0.0),
        }
    }

    pub fn max_width(&self) -> f64 {
        self.self_energy.as_ref().map_or(0.0, |se| self.lambda * self.lambda * se.max_im())
    }
}

fn lattice_energy(p: &[f64]) -> f64 {
    p.iter().map(|x| 1.0 - x.cos()).sum()
}

/// Monte Carlo estimate of `Val(pi)`.
pub fn val_monte_carlo(pi: &Permutation, cfg: &ValConfig) -> Result<FeynmanValue> {
    if !(1..=3).contains(&cfg.dim) {
        return Err(Error::OutOfRange(format!("lattice dimension {} not in 1..=3", cfg.dim)));
    }
    if cfg.samples == 0 || cfg.shards == 0 {
        return Err(Error::OutOfRange("need at least one sample and one shard".into()));
    }
    let prop = PropagatorTable::new(cfg.dim, cfg.lambda, cfg.eta, cfg.renormalized)?;
    val_monte_carlo_with(pi, cfg, &prop)
}

/// As [`val_monte_carlo`] with a prebuilt propagator table.
pub fn val_monte_carlo_with(pi: &Permutation, cfg: &ValConfig, prop: &PropagatorTable) -> Result<FeynmanValue> {
    let n = pi.n();
    let m = build_matrix(pi);
    let weight = cfg.lambda.powi(2 * n as i32);
    let width = 2.0 * (1.0 / cfg.t + prop.max_width());
    let per_shard = cfg.samples.div_ceil(cfg.shards as u64);
    let shards: Vec<ComplexStats> = (0..cfg.shards as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(derive_seed(cfg.seed, s));
            let mut st = ComplexStats::default();
            let d = cfg.dim;
            let mut p = vec![0.0; (n + 1) * d];
            let mut pp = vec![0.0; (n + 1) * d];
            let mut w = vec![Complex64::new(0.0, 0.0); n + 1];
            let mut wp = vec![Complex64::new(0.0, 0.0); n + 1];
            for _ in 0..per_shard {
                for x in p[n * d..].iter_mut() {
                    *x = rng.random_range(-PI..PI);
                }
                let shell = LatticeShell::new(lattice_energy(&p[n * d..]), vec![width]);
                let mut jac = 1.0;
                for j in 0..n {
                    let pj = &mut p[j * d..(j + 1) * d];
                    if cfg.importance {
                        shell.sample(&mut rng, pj);
                        jac /= shell.density(pj);
                    } else {
                        pj.iter_mut().for_each(|x| *x = rng.random_range(-PI..PI));
                    }
                }
                apply_flat(&m, &p, &mut pp, d);
                for j in 0..=n {
                    w[j] = prop.omega_bar(lattice_energy(&p[j * d..(j + 1) * d]));
                    wp[j] = prop.omega_bar(lattice_energy(&pp[j * d..(j + 1) * d]));
                }
                let amp = simplex_integral(cfg.t, &w).conj() * simplex_integral(cfg.t, &wp);
                st.push(amp * weight * jac);
            }
            st
        })
        .collect();
    let mut total = ComplexStats::default();
    for s in &shards {
        total.merge(s);
    }
    let v = FeynmanValue { estimate: total.mean(), std_error: total.std_error(), samples: total.n(), seed: cfg.seed };
    if let Some(cap) = cfg.max_rel_error {
        if v.rel_error() > cap {
            return Err(Error::VarianceCap { rel_err: v.rel_error(), cap });
        }
    }
    Ok(v)
}

fn apply_flat(m: &MomentumMatrix, p: &[f64], out: &mut [f64], d: usize) {
    let k = m.size();
    for i in 0..k {
        for c in 0..d {
            let mut acc = 0.0;
            for j in 0..k {
                let e = m.entries[i * k + j];
                if e != 0 {
                    acc += e as f64 * p[j * d + c];
                }
            }
            out[i * d + c] = acc;
        }
    }
}

/// Time-simplex integral by nested Gauss-Legendre quadrature,
/// `S_n(t; w_0..w_n) = int_0^t ds exp(-i s w_n) S_{n-1}(t - s; w_0..w_{n-1})`.
pub fn simplex_integral_nested(t: f64, w: &[Complex64], rule: &GaussLegendre, panels: usize) -> Complex64 {
    let n = w.len() - 1;
    if n == 0 {
        return (Complex64::new(0.0, -t) * w[0]).exp();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let h = t / panels as f64;
    for k in 0..panels {
        for (s, wt) in rule.mapped(k as f64 * h, (k + 1) as f64 * h) {
            acc += wt * (Complex64::new(0.0, -s) * w[n]).exp() * simplex_integral_nested(t - s, &w[..n], rule, panels);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainConfig {
    pub lambda: f64,
    pub t: f64,
    pub eta: f64,
    pub renormalized: bool,
    /// Momentum grid points per loop momentum (one-dimensional lattice).
    pub grid: usize,
    pub order: usize,
}

/// Deterministic oracle for `Val(pi)`, `n <= 2`, on the one-dimensional lattice:
/// nested time quadrature of both collision histories on a midpoint momentum grid.
pub fn val_time_domain(pi: &Permutation, cfg: &TimeDomainConfig) -> Result<Complex64> {
    let n = pi.n();
    if n > 2 {
        return Err(Error::OutOfRange(format!("time-domain oracle limited to n <= 2, got {n}")));
    }
    let prop = PropagatorTable::new(1, cfg.lambda, cfg.eta, cfg.renormalized)?;
    let m = build_matrix(pi);
    let rule = gauss_legendre(cfg.order);
    let panels = ((cfg.t * 4.5) / 6.0).ceil().max(1.0) as usize;
    let g = cfg.grid;
    let h = 2.0 * PI / g as f64;
    let total = g.pow((n + 1) as u32);
    let weight = cfg.lambda.powi(2 * n as i32);
    let sum: Complex64 = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut r = idx;
            let mut p = vec![0.0; n + 1];
            for x in p.iter_mut() {
                *x = -PI + (r % g) as f64 * h + 0.5 * h;
                r /= g;
            }
            let mut pp = vec![0.0; n + 1];
            apply_flat(&m, &p, &mut pp, 1);
            let w: Vec<Complex64> = p.iter().map(|&x| prop.omega_bar(1.0 - x.cos())).collect();
            let wp: Vec<Complex64> = pp.iter().map(|&x| prop.omega_bar(1.0 - x.cos())).collect();
            simplex_integral_nested(cfg.t, &w, &rule, panels).conj() * simplex_integral_nested(cfg.t, &wp, &rule, panels)
        })
        .sum();
    Ok(sum * weight / total as f64)
}

/// First-order bare ladder in closed form,
/// `lambda^2 int dp_1 dp_2 |Q_t(e(p_1) - e(p_2))|^2` with `Q_t(a) = (e^{ita} - 1)/(ia)`,
/// on a midpoint grid of the one-dimensional lattice.
pub fn ladder_one_closed_form(lambda: f64, t: f64, grid: usize) -> f64 {
    let h = 2.0 * PI / grid as f64;
    let e: Vec<f64> = (0..grid).map(|k| 1.0 - (-PI + (k as f64 + 0.5) * h).cos()).collect();
    let mut acc = 0.0;
    for &a in &e {
        for &b in &e {
            let x = a - b;
            acc += if x.abs() < 1e-12 { t * t } else { (2.0 * (0.5 * t * x).sin() / x).powi(2) };
        }
    }
    lambda * lambda * acc / (grid * grid) as f64
}

//! Integrals against the level-set measure `delta(e(p) - a) dp`, in particular its Fourier transform.
//!
//! Points on the level set are drawn by fixing two coordinates and solving
//! for the third; only the axis with the largest gradient component is kept,
//! which bounds the `1 / |grad e|` weight away from critical points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dispersion::{Dispersion, DispersionKind};
use crate::error::{Error, Result};
use crate::numerics::{fit_line, seeded_rng, ComplexStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierEstimate {
    pub xi: Vec<f64>,
    pub value: Complex64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `int g(p) delta(e(p) - a) dp` (`d = 3`; lattice in
/// the normalized measure), one value per component of `g`.
pub fn level_set_integral<G: FnMut(&[f64; 3], &mut [Complex64])>(
    disp: &Dispersion,
    a: f64,
    components: usize,
    samples: u64,
    seed: u64,
    mut g: G,
) -> Result<Vec<(Complex64, f64)>> {
    if disp.dim != 3 {
        return Err(Error::OutOfRange("level-set sampler implemented for d = 3".into()));
    }
    let (lo, hi) = disp.band();
    // the gradient vanishes on the level set only at the values 2m
    let singular = disp.kind == DispersionKind::Discrete && (a / 2.0 - (a / 2.0).round()).abs() < 1e-6;
    if singular || a <= lo || a >= hi {
        return Err(Error::Degenerate(format!("energy {a} at or near a critical value")));
    }
    let mut rng = seeded_rng(seed);
    let mut stats = vec![ComplexStats::default(); components];
    let r0 = (2.0 * a).sqrt();
    let mut acc = vec![Complex64::new(0.0, 0.0); components];
    let mut buf = vec![Complex64::new(0.0, 0.0); components];
    for _ in 0..samples {
        let j = rng.random_range(0..3);
        let mut p = [0.0; 3];
        let (others, scale) = match disp.kind {
            DispersionKind::Discrete => ([rng.random_range(-PI..PI), rng.random_range(-PI..PI)], 3.0 / (2.0 * PI)),
            DispersionKind::Continuum => ([rng.random_range(-r0..r0), rng.random_range(-r0..r0)], 3.0 * 4.0 * r0 * r0),
        };
        p[(j + 1) % 3] = others[0];
        p[(j + 2) % 3] = others[1];
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // the remaining coordinate solves e(p) = a; its partial derivative gives the weight
        let root = match disp.kind {
            DispersionKind::Discrete => {
                let c = 1.0 + (1.0 - others[0].cos()) + (1.0 - others[1].cos()) - a;
                (c.abs() < 1.0).then(|| c.acos())
            }
            DispersionKind::Continuum => {
                let s = 2.0 * a - others[0].powi(2) - others[1].powi(2);
                (s > 0.0).then(|| s.sqrt())
            }
        };
        if let Some(x) = root {
            for sign in [1.0, -1.0] {
                p[j] = sign * x;
                let grad = disp.grad(&p);
                let gj = grad[j].abs();
                if grad.iter().any(|v| v.abs() > gj) {
                    continue;
                }
                g(&p, &mut buf);
                for (z, b) in acc.iter_mut().zip(&buf) {
                    *z += b * (scale / gj);
                }
            }
        }
        for (s, z) in stats.iter_mut().zip(&acc) {
            s.push(*z);
        }
    }
    Ok(stats.iter().map(|s| (s.mean(), s.std_error())).collect())
}

/// Monte Carlo estimates of `int e^{i p xi} delta(e(p) - a) dp` for several `xi`
/// from one set of level-set samples.
pub fn level_set_fourier_many(disp: &Dispersion, a: f64, xis: &[[f64; 3]], samples: u64, seed: u64) -> Result<Vec<FourierEstimate>> {
    let out = level_set_integral(disp, a, xis.len(), samples, seed, |p, buf| {
        for (z, xi) in buf.iter_mut().zip(xis) {
            *z = Complex64::from_polar(1.0, p.iter().zip(xi).map(|(a, b)| a * b).sum());
        }
    })?;
    Ok(out
        .into_iter()
        .zip(xis)
        .map(|((value, std_error), xi)| FourierEstimate { xi: xi.to_vec(), value, std_error })
        .collect())
}

pub fn level_set_fourier(disp: &Dispersion, a: f64, xi: [f64; 3], samples: u64, seed: u64) -> Result<FourierEstimate> {
    Ok(level_set_fourier_many(disp, a, &[xi], samples, seed)?.remove(0))
}

/// Closed form on the sphere `|p|^2 / 2 = a`: `4 pi sin(sqrt(2a) |xi|) / |xi|`.
pub fn sphere_fourier(a: f64, xi_norm: f64) -> f64 {
    let r0 = (2.0 * a).sqrt();
    if xi_norm < 1e-12 {
        4.0 * PI * r0
    } else {
        4.0 * PI * (r0 * xi_norm).sin() / xi_norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub a: f64,
    pub direction: [f64; 3],
    pub radii: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub slope: f64,
    pub slope_std_error: f64,
}

/// Log-log decay of `|mu_a(r nu)|` in the continuum, sampled at the crests
/// `r = (k + 1/2) pi / sqrt(2a)` of the oscillation inside `[r_min, r_max]`.
pub fn sphere_decay(a: f64, direction: [f64; 3], r_min: f64, r_max: f64, samples: u64, seed: u64) -> Result<DecayReport> {
    let r0 = (2.0 * a).sqrt();
    let radii: Vec<f64> = (0..)
        .map(|k| (k as f64 + 0.5) * PI / r0)
        .skip_while(|&r| r < r_min)
        .take_while(|&r| r <= r_max)
        .collect();
    decay(&Dispersion::continuum(3), a, direction, radii, samples, seed)
}

/// Same on the lattice along integer points `round(r nu)`.
pub fn lattice_decay(a: f64, direction: [f64; 3], radii: &[f64], samples: u64, seed: u64) -> Result<DecayReport> {
    decay(&Dispersion::discrete(3), a, direction, radii.to_vec(), samples, seed)
}

fn decay(disp: &Dispersion, a: f64, direction: [f64; 3], radii: Vec<f64>, samples: u64, seed: u64) -> Result<DecayReport> {
    let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nu = direction.map(|x| x / n);
    let lattice = disp.kind == DispersionKind::Discrete;
    let xis: Vec<[f64; 3]> = radii
        .iter()
        .map(|&r| nu.map(|x| if lattice { (r * x).round() } else { r * x }))
        .collect();
    let radii: Vec<f64> = xis.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let est = level_set_fourier_many(disp, a, &xis, samples, seed)?;
    let magnitudes: Vec<f64> = est.iter().map(|e| e.value.norm()).collect();
    let std_errors: Vec<f64> = est.iter().map(|e| e.std_error).collect();
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    let fit = fit_line(&lx, &ly);
    Ok(DecayReport { a, direction: nu, radii, magnitudes, std_errors, slope: fit.slope, slope_std_error: fit.slope_std_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_integrator::{DensityOfStates, FormFactor, Model};

    #[test]
    fn zero_frequency_is_level_set_measure() {
        let e = level_set_fourier(&Dispersion::continuum(3), 1.0, [0.0; 3], 100_000, 1).unwrap();
        let exact = Model::Continuum { form: FormFactor::Gaussian }.level_set_measure(1.0);
        assert!((e.value.re - exact).abs() < 3.0 * e.std_error + 1e-9, "{} {exact}", e.value);
        let l = level_set_fourier(&Dispersion::discrete(3), 2.5, [0.0; 3], 200_000, 2).unwrap();
        let rho = DensityOfStates::shared(3).rho(2.5);
        assert!((l.value.re - rho).abs() < 4.0 * l.std_error, "{} {rho} {}", l.value, l.std_error);
    }

    #[test]
    fn sphere_matches_closed_form() {
        let e = level_set_fourier(&Dispersion::continuum(3), 0.8, [1.0, 2.0, -0.5], 200_000, 3).unwrap();
        let exact = sphere_fourier(0.8, (1.0f64 + 4.0 + 0.25).sqrt());
        assert!((e.value.re - exact).abs() < 4.0 * e.std_error && e.value.im.abs() < 4.0 * e.std_error);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_hamiltonian, Hamiltonian, SpectralPropagator};
use super::lattice::{LatticeBox, PotentialLaw, WaveFunction};
use crate::error::Result;
use crate::numerics::{derive_seed, fit_line, LineFit};

/// Boundary mass above which a displacement is flagged as wrapped.
pub const BOUNDARY_MASS_CAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsdResult {
    /// `sum_x |psi(x)|^2 dist(x, 0)^2` with minimal-image distance.
    pub value: f64,
    /// Mass on the two outermost layers of the box.
    pub boundary_mass: f64,
    pub flagged: bool,
}

pub fn msd(psi: &WaveFunction) -> MsdResult {
    let lat = psi.lattice;
    let edge = (lat.side / 2) as i64 - 1;
    let mut value = 0.0;
    let mut boundary_mass = 0.0;
    for (i, z) in psi.amp.iter().enumerate() {
        let p = z.norm_sqr();
        value += p * lat.dist2(i);
        if lat.centered(i).iter().any(|c| c.abs() >= edge) {
            boundary_mass += p;
        }
    }
    MsdResult { value, boundary_mass, flagged: boundary_mass > BOUNDARY_MASS_CAP }
}

/// `(1/N) sum_p |grad w(p)|^2` over the box momenta, `w = 2 e` the free symbol.
pub fn ballistic_oracle(lattice: &LatticeBox) -> f64 {
    let n = lattice.sites();
    (0..n).map(|k| lattice.momentum(k).iter().map(|p| 4.0 * p.sin().powi(2)).sum::<f64>()).sum::<f64>() / n as f64
}

pub fn msd_curve(h: &Hamiltonian, psi0: &WaveFunction, times: &[f64]) -> Result<Vec<MsdResult>> {
    let prop = SpectralPropagator::new(h)?;
    Ok(times
        .iter()
        .map(|&t| msd(&WaveFunction { lattice: h.lattice, amp: prop.evolve(&psi0.amp, t) }))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallisticFit {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
    /// `<x^2>_t = a t^2 + b`.
    pub fit: LineFit,
    pub oracle: f64,
    pub rel_error: f64,
    pub flagged: bool,
}

/// Free evolution from a delta: fit of `<x^2>_t` against `t^2`.
pub fn free_ballistic_fit(lattice: LatticeBox, times: &[f64]) -> Result<BallisticFit> {
    let curve = msd_curve(&Hamiltonian::free(lattice), &WaveFunction::delta(lattice, 0), times)?;
    let t2: Vec<f64> = times.iter().map(|t| t * t).collect();
    let msd: Vec<f64> = curve.iter().map(|r| r.value).collect();
    let fit = fit_line(&t2, &msd);
    let oracle = ballistic_oracle(&lattice);
    Ok(BallisticFit {
        times: times.to_vec(),
        rel_error: (fit.slope / oracle - 1.0).abs(),
        fit,
        oracle,
        flagged: curve.iter().any(|r| r.flagged),
        msd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub lambda: f64,
    pub realizations: usize,
    pub times: Vec<f64>,
    pub mean_msd: Vec<f64>,
    pub free_msd: Vec<f64>,
    /// Slope of `ln <x^2>` against `ln t`.
    pub exponent: f64,
    pub free_exponent: f64,
    pub flagged: bool,
    pub seed: u64,
}

/// Disorder-averaged displacement from a delta start and its growth exponent.
pub fn msd_growth(lattice: LatticeBox, lambda: f64, law: PotentialLaw, realizations: usize, times: &[f64], seed: u64) -> Result<GrowthReport> {
    let curves: Vec<Vec<MsdResult>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let h = build_hamiltonian(lattice, lambda, law, derive_seed(seed, r as u64))?;
            msd_curve(&h, &WaveFunction::delta(lattice, 0), times)
        })
        .collect::<Result<_>>()?;
    let mean_msd: Vec<f64> =
        (0..times.len()).map(|k| curves.iter().map(|c| c[k].value).sum::<f64>() / realizations as f64).collect();
    let free = msd_curve(&Hamiltonian::free(lattice), &WaveFunction::delta(lattice, 0), times)?;
    let free_msd: Vec<f64> = free.iter().map(|r| r.value).collect();
    let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let slope = |y: &[f64]| fit_line(&lt, &y.iter().map(|v| v.ln()).collect::<Vec<_>>()).slope;
    Ok(GrowthReport {
        lambda,
        realizations,
        times: times.to_vec(),
        exponent: slope(&mean_msd),
        free_exponent: slope(&free_msd),
        flagged: curves.iter().flatten().chain(&free).any(|r| r.flagged),
        mean_msd,
        free_msd,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_time_zero() {
        let b = LatticeBox::new(2, 8).unwrap();
        let r = msd(&WaveFunction::delta(b, 0));
        assert_eq!(r.value, 0.0);
        assert!(!r.flagged);
    }

    #[test]
    fn free_spreading_is_ballistic() {
        let b = LatticeBox::new(1, 128).unwrap();
        let times: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
        let f = free_ballistic_fit(b, &times).unwrap();
        assert!(!f.flagged);
        assert!((f.oracle - 2.0).abs() < 1e-12);
        assert!(f.rel_error < 0.02, "{f:?}");
    }

    #[test]
    fn wrapped_state_is_flagged() {
        let b = LatticeBox::new(1, 16).unwrap();
        let c = msd_curve(&Hamiltonian::free(b), &WaveFunction::delta(b, 0), &[10.0]).unwrap();
        assert!(c[0].flagged);
    }
}

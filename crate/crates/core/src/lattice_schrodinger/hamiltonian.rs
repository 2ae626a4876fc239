use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::lattice::{BoxFft, LatticeBox, PotentialLaw, RandomPotential, WaveFunction};
use crate::error::{Error, Result};

/// `H = H_0 + lambda V` with `(H_0 f)(x) = 2d f(x) - sum_{|e|=1} f(x+e)` on a periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub lattice: LatticeBox,
    pub lambda: f64,
    pub potential: RandomPotential,
}

pub fn build_hamiltonian(lattice: LatticeBox, lambda: f64, law: PotentialLaw, seed: u64) -> Result<Hamiltonian> {
    if !(lambda >= 0.0) {
        return Err(Error::OutOfRange(format!("coupling {lambda}")));
    }
    Ok(Hamiltonian { lattice, lambda, potential: RandomPotential::sample(&lattice, law, seed) })
}

impl Hamiltonian {
    pub fn free(lattice: LatticeBox) -> Self {
        Self { lattice, lambda: 0.0, potential: RandomPotential::zero(&lattice) }
    }

    pub fn with_potential(lattice: LatticeBox, lambda: f64, potential: RandomPotential) -> Result<Self> {
        if potential.values.len() != lattice.sites() {
            return Err(Error::DimensionMismatch { expected: lattice.sites(), got: potential.values.len() });
        }
        Ok(Self { lattice, lambda, potential })
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let d2 = 2.0 * self.lattice.dim as f64;
        (0..psi.len())
            .map(|i| {
                let hop: Complex64 = self.lattice.neighbors(i).iter().map(|&j| psi[j]).sum();
                psi[i] * (d2 + self.lambda * self.potential.values[i]) - hop
            })
            .collect()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.lattice.sites();
        let d2 = 2.0 * self.lattice.dim as f64;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = d2 + self.lambda * self.potential.values[i];
            for j in self.lattice.neighbors(i) {
                m[(i, j)] -= 1.0;
            }
        }
        m
    }

    /// Interval containing the spectrum: `[-lambda |v|_inf, 4d + lambda |v|_inf]`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let s = self.lambda * self.potential.sup_norm();
        (-s, 4.0 * self.lattice.dim as f64 + s)
    }
}

/// Eigendecomposition of a Hamiltonian for exact evolution.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Largest box handled by dense diagonalization.
pub const DENSE_SITE_LIMIT: usize = 4096;

impl SpectralPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        if h.lattice.sites() > DENSE_SITE_LIMIT {
            return Err(Error::OutOfRange(format!("{} sites exceed the dense limit", h.lattice.sites())));
        }
        let e = SymmetricEigen::new(h.dense());
        Ok(Self { eigenvalues: e.eigenvalues, eigenvectors: e.eigenvectors })
    }

    /// `e^{-itH} psi`.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let u = &self.eigenvectors;
        let n = psi.len();
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                s += psi[i] * u[(i, k)];
            }
            c[k] = s * Complex64::from_polar(1.0, -t * self.eigenvalues[k]);
        }
        (0..n).map(|i| (0..n).map(|k| c[k] * u[(i, k)]).sum()).collect()
    }
}

/// Free evolution `e^{-itH_0}` by FFT.
#[derive(Debug, Clone)]
pub struct FreePropagator {
    fft: BoxFft,
    symbol: Vec<f64>,
}

impl FreePropagator {
    pub fn new(lattice: LatticeBox) -> Self {
        Self { fft: BoxFft::new(lattice), symbol: (0..lattice.sites()).map(|k| lattice.free_symbol(k)).collect() }
    }

    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut d = psi.to_vec();
        self.fft.forward(&mut d);
        for (z, w) in d.iter_mut().zip(&self.symbol) {
            *z *= Complex64::from_polar(1.0, -t * w);
        }
        self.fft.inverse(&mut d);
        d
    }
}

/// Bessel values `J_0(x) .. J_k(x)` by downward recurrence, normalized with
/// `J_0 + 2 sum J_{2m} = 1`.
fn bessel_j(kmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let start = (kmax + (x as usize) + 40) | 1;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            j.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(kmax + 1);
    j.iter_mut().for_each(|v| *v /= norm);
    j
}

/// `e^{-itH} psi` by Chebyshev expansion. Returns the state and a bound on the
/// truncation error from `|J_k(x)| <= (x/2)^k / k!`.
pub fn chebyshev_evolve(h: &Hamiltonian, psi: &[Complex64], t: f64, tol: f64) -> Result<(Vec<Complex64>, f64)> {
    const MAX_TERMS: usize = 1_000_000;
    let (lo, hi) = h.spectral_bounds();
    let a = 0.5 * (hi - lo) * 1.01;
    let b = 0.5 * (hi + lo);
    let x = a * t.abs();
    // smallest order whose analytic tail bound is below tol
    let mut k = (x.ceil() as usize) + 1;
    let tail_bound = |k: usize| -> f64 {
        let mut ln = (k + 1) as f64 * (x / 2.0).max(1e-300).ln();
        ln -= (1..=k + 1).map(|m| (m as f64).ln()).sum::<f64>();
        let ratio = x / (2.0 * (k + 2) as f64);
        2.0 * ln.exp() / (1.0 - ratio)
    };
    while tail_bound(k) > tol {
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::Convergence(format!("Chebyshev expansion needs more than {MAX_TERMS} terms")));
        }
    }
    let err = tail_bound(k);
    let jk = bessel_j(k, x);
    let scaled = |v: &[Complex64]| -> Vec<Complex64> {
        h.apply(v).iter().zip(v).map(|(hv, v)| (hv - v * b) / a).collect()
    };
    let sign = if t >= 0.0 { 1.0 } else { -1.0 };
    let mut t0 = psi.to_vec();
    let mut t1 = scaled(psi);
    let mut out: Vec<Complex64> = t0.iter().map(|z| z * jk[0]).collect();
    let mut phase = Complex64::new(0.0, -sign);
    for (i, z) in out.iter_mut().enumerate() {
        *z += 2.0 * jk[1] * phase * t1[i];
    }
    for &jm in jk.iter().skip(2) {
        let t2: Vec<Complex64> = scaled(&t1).iter().zip(&t0).map(|(a, b)| 2.0 * a - b).collect();
        phase *= Complex64::new(0.0, -sign);
        for (i, z) in out.iter_mut().enumerate() {
            *z += 2.0 * jm * phase * t2[i];
        }
        t0 = t1;
        t1 = t2;
    }
    let g = Complex64::from_polar(1.0, -t * b);
    out.iter_mut().for_each(|z| *z *= g);
    Ok((out, err))
}

/// `e^{-itH} psi_0`: dense spectral method up to [`DENSE_SITE_LIMIT`] sites,
/// Chebyshev expansion with truncation error below `1e-10` above.
pub fn evolve(h: &Hamiltonian, psi0: &WaveFunction, t: f64) -> Result<WaveFunction> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange(format!("initial state has norm {}", psi0.norm())));
    }
    let amp = if h.lattice.sites() <= DENSE_SITE_LIMIT {
        SpectralPropagator::new(h)?.evolve(&psi0.amp, t)
    } else {
        chebyshev_evolve(h, &psi0.amp, t, 1e-10)?.0
    };
    WaveFunction::new(h.lattice, amp)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn free_spectrum_is_the_dispersion() {
        let b = LatticeBox::new(1, 8).unwrap();
        let e = SymmetricEigen::new(Hamiltonian::free(b).dense()).eigenvalues;
        let mut got: Vec<f64> = e.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (0..8).map(|k| 2.0 * (1.0 - (2.0 * PI * k as f64 / 8.0).cos())).collect();
        want.sort_by(f64::total_cmp);
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn hamiltonian_is_symmetric_with_bounded_spectrum() {
        let b = LatticeBox::new(2, 6).unwrap();
        let h = build_hamiltonian(b, 0.3, PotentialLaw::Uniform, 4).unwrap();
        let m = h.dense();
        assert!((&m - m.transpose()).amax() < 1e-15);
        let (lo, hi) = h.spectral_bounds();
        let e = SymmetricEigen::new(m).eigenvalues;
        assert!(e.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
    }

    #[test]
    fn plane_wave_picks_up_a_phase() {
        let b = LatticeBox::new(1, 8).unwrap();
        let psi = WaveFunction::plane_wave(b, &[3]);
        let h = Hamiltonian::free(b);
        let out = evolve(&h, &psi, 1.7).unwrap();
        let w = 2.0 * (1.0 - (2.0 * PI * 3.0 / 8.0).cos());
        let ph = Complex64::from_polar(1.0, -1.7 * w);
        assert!(out.amp.iter().zip(&psi.amp).all(|(a, b)| (a - b * ph).norm() < 1e-12));
        let same = evolve(&h, &psi, 0.0).unwrap();
        assert!(same.distance(&psi) < 1e-13);
    }

    #[test]
    fn evolution_is_unitary() {
        let b = LatticeBox::new(1, 32).unwrap();
        let h = build_hamiltonian(b, 0.5, PotentialLaw::Bernoulli, 9).unwrap();
        let psi = WaveFunction::delta(b, 0);
        for t in [0.5, 5.0, 50.0] {
            assert!((evolve(&h, &psi, t).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn propagators_agree() {
        let b = LatticeBox::new(2, 8).unwrap();
        let h = build_hamiltonian(b, 0.4, PotentialLaw::Gaussian, 2).unwrap();
        let psi = WaveFunction::random(b, 6);
        let spectral = SpectralPropagator::new(&h).unwrap().evolve(&psi.amp, 3.0);
        let (cheb, bound) = chebyshev_evolve(&h, &psi.amp, 3.0, 1e-12).unwrap();
        assert!(bound <= 1e-12);
        let diff: f64 = spectral.iter().zip(&cheb).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff < 1e-10, "{diff}");
        let free = FreePropagator::new(b).evolve(&psi.amp, 3.0);
        let exact = SpectralPropagator::new(&Hamiltonian::free(b)).unwrap().evolve(&psi.amp, 3.0);
        assert!(free.iter().zip(&exact).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}

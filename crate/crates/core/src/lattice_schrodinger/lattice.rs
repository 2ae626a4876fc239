use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::seeded_rng;

/// Periodic box `(Z / L Z)^d`; site `x` has index `sum_j x_j L^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub dim: usize,
    pub side: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) || side < 4 {
            return Err(Error::OutOfRange(format!("box d = {dim}, L = {side}")));
        }
        if side.checked_pow(dim as u32).is_none_or(|n| n > 1 << 20) {
            return Err(Error::OutOfRange(format!("box with L = {side} in d = {dim} is too large")));
        }
        Ok(Self { dim, side })
    }

    pub fn sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|_| {
                let c = idx % self.side;
                idx /= self.side;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// Minimal-image representative of each coordinate, in `[-L/2, L/2)`.
    pub fn centered(&self, idx: usize) -> Vec<i64> {
        let l = self.side as i64;
        self.coords(idx)
            .into_iter()
            .map(|c| {
                let c = c as i64;
                if c >= (l + 1) / 2 {
                    c - l
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn dist2(&self, idx: usize) -> f64 {
        self.centered(idx).iter().map(|&c| (c * c) as f64).sum()
    }

    /// Momentum `2 pi k / L` of grid index `idx`, in `[-pi, pi)`.
    pub fn momentum(&self, idx: usize) -> Vec<f64> {
        self.centered(idx).into_iter().map(|k| 2.0 * PI * k as f64 / self.side as f64).collect()
    }

    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let c = self.coords(idx);
        let mut out = Vec::with_capacity(2 * self.dim);
        for j in 0..self.dim {
            for step in [1, self.side - 1] {
                let mut n = c.clone();
                n[j] = (n[j] + step) % self.side;
                out.push(self.index(&n));
            }
        }
        out
    }

    /// Symbol `2 e(p) = 2 sum_j (1 - cos p_j)` of the free Hamiltonian.
    pub fn free_symbol(&self, idx: usize) -> f64 {
        2.0 * self.momentum(idx).iter().map(|p| 1.0 - p.cos()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum PotentialLaw {
    /// `+1` or `-1` with probability one half.
    Bernoulli,
    /// Uniform on `[-sqrt 3, sqrt 3]`, unit variance.
    Uniform,
    /// Standard normal.
    Gaussian,
}

impl PotentialLaw {
    /// `E v^k` of the law.
    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        match self {
            PotentialLaw::Bernoulli => 1.0,
            PotentialLaw::Uniform => 3f64.powi(k as i32 / 2) / (k as f64 + 1.0),
            PotentialLaw::Gaussian => (1..k).step_by(2).map(|j| j as f64).product(),
        }
    }
}

/// I.i.d. on-site potential values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomPotential {
    pub law: PotentialLaw,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl RandomPotential {
    pub fn sample(lattice: &LatticeBox, law: PotentialLaw, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let values = (0..lattice.sites())
            .map(|_| match law {
                PotentialLaw::Bernoulli => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                PotentialLaw::Uniform => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
                PotentialLaw::Gaussian => StandardNormal.sample(&mut rng),
            })
            .collect();
        Self { law, values, seed }
    }

    pub fn zero(lattice: &LatticeBox) -> Self {
        Self { law: PotentialLaw::Bernoulli, values: vec![0.0; lattice.sites()], seed: 0 }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn empirical_moment(&self, k: i32) -> f64 {
        self.values.iter().map(|v| v.powi(k)).sum::<f64>() / self.values.len() as f64
    }
}

/// Complex amplitudes on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub lattice: LatticeBox,
    pub amp: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(lattice: LatticeBox, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != lattice.sites() {
            return Err(Error::DimensionMismatch { expected: lattice.sites(), got: amp.len() });
        }
        Ok(Self { lattice, amp })
    }

    pub fn delta(lattice: LatticeBox, site: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); lattice.sites()];
        amp[site] = Complex64::new(1.0, 0.0);
        Self { lattice, amp }
    }

    /// Normalized plane wave `e^{i p x}` with `p = 2 pi k / L`.
    pub fn plane_wave(lattice: LatticeBox, k: &[usize]) -> Self {
        let n = lattice.sites();
        let amp = (0..n)
            .map(|i| {
                let x = lattice.coords(i);
                let ph: f64 = x.iter().zip(k).map(|(&a, &b)| 2.0 * PI * (a * b) as f64 / lattice.side as f64).sum();
                Complex64::from_polar(1.0 / (n as f64).sqrt(), ph)
            })
            .collect();
        Self { lattice, amp }
    }

    /// Normalized Gaussian packet centred at the origin with momentum `p0`.
    pub fn gaussian(lattice: LatticeBox, width: f64, p0: &[f64]) -> Self {
        let amp = (0..lattice.sites())
            .map(|i| {
                let x = lattice.centered(i);
                let r2: f64 = x.iter().map(|&c| (c * c) as f64).sum();
                let ph: f64 = x.iter().zip(p0).map(|(&c, p)| c as f64 * p).sum();
                Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), ph)
            })
            .collect();
        let mut w = Self { lattice, amp };
        w.normalize();
        w
    }

    /// Seeded random state with independent Gaussian amplitudes, normalized.
    pub fn random(lattice: LatticeBox, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let amp = (0..lattice.sites())
            .map(|_| {
                let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                Complex64::new(a, b)
            })
            .collect();
        let mut w = Self { lattice, amp };
        w.normalize();
        w
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.amp.iter_mut().for_each(|z| *z /= n);
    }

    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &WaveFunction) -> f64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Multi-dimensional FFT on a box with `psi^(p) = sum_x e^{-i p x} psi(x)`.
#[derive(Clone)]
pub struct BoxFft {
    pub lattice: LatticeBox,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BoxFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoxFft").field("lattice", &self.lattice).finish()
    }
}

impl BoxFft {
    pub fn new(lattice: LatticeBox) -> Self {
        let mut planner = FftPlanner::new();
        Self { lattice, forward: planner.plan_fft_forward(lattice.side), inverse: planner.plan_fft_inverse(lattice.side) }
    }

    fn along_axes(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let l = self.lattice.side;
        let n = data.len();
        let mut line = vec![Complex64::new(0.0, 0.0); l];
        for axis in 0..self.lattice.dim {
            let stride = l.pow(axis as u32);
            for start in 0..n {
                // first element of each line along this axis
                if (start / stride) % l != 0 {
                    continue;
                }
                for k in 0..l {
                    line[k] = data[start + k * stride];
                }
                fft.process(&mut line);
                for k in 0..l {
                    data[start + k * stride] = line[k];
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.along_axes(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.along_axes(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// `psi^` on the momentum grid, indexed like the sites.
    pub fn transform(&self, psi: &WaveFunction) -> Vec<Complex64> {
        let mut d = psi.amp.clone();
        self.forward(&mut d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_neighbors() {
        let b = LatticeBox::new(3, 5).unwrap();
        for i in [0, 7, 124] {
            assert_eq!(b.index(&b.coords(i)), i);
        }
        let n = b.neighbors(0);
        assert_eq!(n.len(), 6);
        assert!(n.contains(&4) && n.contains(&1) && n.contains(&100));
    }

    #[test]
    fn fft_diagonalizes_shift_and_is_unitary_up_to_n() {
        let b = LatticeBox::new(2, 6).unwrap();
        let f = BoxFft::new(b);
        let psi = WaveFunction::random(b, 3);
        let hat = f.transform(&psi);
        let parseval: f64 = hat.iter().map(|z| z.norm_sqr()).sum::<f64>() / b.sites() as f64;
        assert!((parseval - 1.0).abs() < 1e-12);
        let mut back = hat.clone();
        f.inverse(&mut back);
        assert!(back.iter().zip(&psi.amp).all(|(a, b)| (a - b).norm() < 1e-12));
        // compare one coefficient with the defining sum
        let k = 7;
        let p = b.momentum(k);
        let direct: Complex64 = (0..b.sites())
            .map(|i| {
                let x = b.coords(i);
                psi.amp[i] * Complex64::from_polar(1.0, -(x[0] as f64 * p[0] + x[1] as f64 * p[1]))
            })
            .sum();
        assert!((direct - hat[k]).norm() < 1e-12);
    }

    #[test]
    fn potential_moments() {
        let b = LatticeBox::new(1, 4096).unwrap();
        let v = RandomPotential::sample(&b, PotentialLaw::Uniform, 5);
        assert!(v.empirical_moment(1).abs() < 0.05);
        assert!((v.empirical_moment(2) - 1.0).abs() < 0.05);
        assert_eq!(PotentialLaw::Gaussian.moment(4), 3.0);
        assert!((PotentialLaw::Uniform.moment(4) - 9.0 / 5.0).abs() < 1e-15);
        assert_eq!(PotentialLaw::Bernoulli.moment(3), 0.0);
    }
}

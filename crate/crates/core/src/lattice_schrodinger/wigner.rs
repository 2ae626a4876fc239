//! Lattice Wigner transform `W(x, v) = sum_{y + z = 2x} e^{i v (y - z)} conj(psi(y)) psi(z)`
//! with `x` on the half lattice.
//!
//! The box is embedded in `Z^d` through minimal-image coordinates. With the
//! counting measure in `x` and the normalized measure in `v`, the marginals are
//! `|psi(x)|^2` at integer sites (zero at the other half-lattice points) and
//! `|psi^(v)|^2`. The view [`WignerField::scaled`] multiplies by `2^d` for use
//! with the half-lattice measure `2^{-d} sum_x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{BoxFft, LatticeBox, WaveFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub lattice: LatticeBox,
    /// Spatial rescaling: the field represents `eps^{-d} W(X / eps, v)`.
    pub eps: f64,
    /// Points per dimension in both `2x` and `v`: `2L`.
    pub m: usize,
    /// `values[ix * m^d + iv]`, with `2x = ix_j - L` and `v_j = -pi + 2 pi iv_j / m`.
    pub values: Vec<f64>,
    /// Largest imaginary part met while summing; zero up to rounding.
    pub max_imag: f64,
}

fn unflatten(mut i: usize, m: usize, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let c = i % m;
            i /= m;
            c
        })
        .collect()
}

impl WignerField {
    fn points(&self) -> usize {
        self.m.pow(self.lattice.dim as u32)
    }

    /// Half-lattice point `x` (unscaled) of flat index `ix`.
    pub fn x(&self, ix: usize) -> Vec<f64> {
        let l = self.lattice.side as f64;
        unflatten(ix, self.m, self.lattice.dim).iter().map(|&c| 0.5 * (c as f64 - l)).collect()
    }

    /// Rescaled position `X = eps x`.
    pub fn position(&self, ix: usize) -> Vec<f64> {
        self.x(ix).into_iter().map(|c| c * self.eps).collect()
    }

    pub fn v(&self, iv: usize) -> Vec<f64> {
        unflatten(iv, self.m, self.lattice.dim).iter().map(|&c| -PI + 2.0 * PI * c as f64 / self.m as f64).collect()
    }

    pub fn value(&self, ix: usize, iv: usize) -> f64 {
        self.values[ix * self.points() + iv]
    }

    /// `eps^{-d} W(X / eps, v)`.
    pub fn density(&self, ix: usize, iv: usize) -> f64 {
        self.value(ix, iv) * self.eps.powi(-(self.lattice.dim as i32))
    }

    /// `int W(x, v) dv` for every half-lattice `x`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let p = self.points();
        self.values.chunks(p).map(|row| row.iter().sum::<f64>() / p as f64).collect()
    }

    /// `sum_x W(x, v)` for every `v`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let p = self.points();
        let mut out = vec![0.0; p];
        for row in self.values.chunks(p) {
            out.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.position_marginal().iter().sum()
    }

    /// `2^d W`, whose `v`-marginal is `2^d |psi(x)|^2` and whose `x`-integral
    /// with `2^{-d} sum_x` is `|psi^(v)|^2`.
    pub fn scaled(&self) -> WignerField {
        let f = 2f64.powi(self.lattice.dim as i32);
        WignerField { values: self.values.iter().map(|w| w * f).collect(), ..self.clone() }
    }

    /// `sum_x e^{-i x xi} W(x, v)` at grid momentum `iv`.
    pub fn fourier(&self, xi: &[f64], iv: usize) -> Complex64 {
        (0..self.points())
            .map(|ix| {
                let ph: f64 = self.x(ix).iter().zip(xi).map(|(a, b)| a * b).sum();
                Complex64::from_polar(self.value(ix, iv), -ph)
            })
            .sum()
    }
}

/// Wigner transform of `psi`, optionally rescaled by `eps`.
pub fn wigner(psi: &WaveFunction, eps: Option<f64>) -> WignerField {
    let lat = psi.lattice;
    let d = lat.dim;
    let l = lat.side as i64;
    let m = 2 * lat.side;
    let points = m.pow(d as u32);
    let coords: Vec<Vec<i64>> = (0..lat.sites()).map(|i| lat.centered(i)).collect();
    let lo = -(l / 2);
    let hi = lo + l; // exclusive
    let mut lookup = std::collections::HashMap::with_capacity(coords.len());
    for (i, c) in coords.iter().enumerate() {
        lookup.insert(c.clone(), i);
    }
    let vgrid: Vec<Vec<f64>> =
        (0..points).map(|iv| unflatten(iv, m, d).iter().map(|&c| -PI + 2.0 * PI * c as f64 / m as f64).collect()).collect();
    let mut values = vec![0.0; points * points];
    let mut max_imag: f64 = 0.0;
    for ix in 0..points {
        let two_x: Vec<i64> = unflatten(ix, m, d).iter().map(|&c| c as i64 - l).collect();
        let mut pairs: Vec<(Vec<i64>, Complex64)> = Vec::new();
        for (iy, y) in coords.iter().enumerate() {
            let z: Vec<i64> = two_x.iter().zip(y).map(|(a, b)| a - b).collect();
            if z.iter().any(|&c| c < lo || c >= hi) {
                continue;
            }
            let iz = lookup[&z];
            let c = psi.amp[iy].conj() * psi.amp[iz];
            if c.norm_sqr() > 0.0 {
                pairs.push((y.iter().zip(&z).map(|(a, b)| a - b).collect(), c));
            }
        }
        for (iv, v) in vgrid.iter().enumerate() {
            let w: Complex64 = pairs
                .iter()
                .map(|(f, c)| c * Complex64::from_polar(1.0, f.iter().zip(v).map(|(a, b)| *a as f64 * b).sum()))
                .sum();
            max_imag = max_imag.max(w.im.abs());
            values[ix * points + iv] = w.re;
        }
    }
    WignerField { lattice: lat, eps: eps.unwrap_or(1.0), m, values, max_imag }
}

/// `psi^(p) = sum_x e^{-i p x} psi(x)` at an arbitrary momentum, minimal-image coordinates.
pub fn fourier_at(psi: &WaveFunction, p: &[f64]) -> Complex64 {
    (0..psi.lattice.sites())
        .map(|i| {
            let ph: f64 = psi.lattice.centered(i).iter().zip(p).map(|(&c, q)| c as f64 * q).sum();
            psi.amp[i] * Complex64::from_polar(1.0, -ph)
        })
        .sum()
}

/// `conj(psi^(v - xi/2)) psi^(v + xi/2)`.
pub fn wigner_fourier(psi: &WaveFunction, xi: &[f64], v: &[f64]) -> Complex64 {
    let vm: Vec<f64> = v.iter().zip(xi).map(|(a, b)| a - 0.5 * b).collect();
    let vp: Vec<f64> = v.iter().zip(xi).map(|(a, b)| a + 0.5 * b).collect();
    fourier_at(psi, &vm).conj() * fourier_at(psi, &vp)
}

/// `(|<J^, W^_psi> - <J^, W^_phi>|, int dxi sup_v |J^|)` on the grid
/// `v = 2 pi k / L`, `xi = 4 pi m / L`, both with normalized measures.
pub(crate) fn pairing_difference<J: Fn(&[f64], &[f64]) -> Complex64>(psi: &WaveFunction, phi: &WaveFunction, jhat: &J) -> (f64, f64) {
    let lat = psi.lattice;
    let n = lat.sites();
    let fft = BoxFft::new(lat);
    let a = fft.transform(psi);
    let b = fft.transform(phi);
    let mut diff = Complex64::new(0.0, 0.0);
    let mut weight = 0.0;
    for m in 0..n {
        let mc = lat.coords(m);
        let xi: Vec<f64> = mc.iter().map(|&c| 4.0 * PI * c as f64 / lat.side as f64).collect();
        let mut sup: f64 = 0.0;
        for k in 0..n {
            let kc = lat.coords(k);
            let plus: Vec<usize> = kc.iter().zip(&mc).map(|(x, y)| (x + y) % lat.side).collect();
            let minus: Vec<usize> = kc.iter().zip(&mc).map(|(x, y)| (x + lat.side - y) % lat.side).collect();
            let (ip, im) = (lat.index(&plus), lat.index(&minus));
            let j = jhat(&xi, &lat.momentum(k));
            sup = sup.max(j.norm());
            diff += j * (a[im].conj() * a[ip] - b[im].conj() * b[ip]);
        }
        weight += sup;
    }
    let nn = n as f64;
    (diff.norm() / (nn * nn), weight / nn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|<J^, W^_psi> - <J^, W^_phi>| <= (int dxi sup_v |J^|) (|psi| + |phi|) |psi - phi|`.
pub fn wigner_continuity<J: Fn(&[f64], &[f64]) -> Complex64>(psi: &WaveFunction, phi: &WaveFunction, jhat: J) -> ContinuityCheck {
    let (lhs, weight) = pairing_difference(psi, phi, &jhat);
    let rhs = weight * (psi.norm() + phi.norm()) * psi.distance(phi);
    ContinuityCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integer_site(field: &WignerField, ix: usize) -> Option<usize> {
        let x = field.x(ix);
        if x.iter().all(|c| c.fract() == 0.0) {
            let l = field.lattice.side as i64;
            let c: Vec<usize> = x.iter().map(|&c| (c as i64).rem_euclid(l) as usize).collect();
            Some(field.lattice.index(&c))
        } else {
            None
        }
    }

    #[test]
    fn delta_state() {
        let b = LatticeBox::new(1, 8).unwrap();
        let w = wigner(&WaveFunction::delta(b, 0), None);
        for ix in 0..w.m {
            let x = w.x(ix);
            for iv in 0..w.m {
                let want = if x[0] == 0.0 { 1.0 } else { 0.0 };
                assert!((w.value(ix, iv) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn marginals_and_reality() {
        for (d, l) in [(1, 8), (2, 4)] {
            let b = LatticeBox::new(d, l).unwrap();
            let psi = WaveFunction::random(b, 17);
            let w = wigner(&psi, None);
            assert!(w.max_imag < 1e-12);
            let pm = w.position_marginal();
            for (ix, &p) in pm.iter().enumerate() {
                let want = integer_site(&w, ix).map_or(0.0, |i| psi.amp[i].norm_sqr());
                assert!((p - want).abs() < 1e-13, "{p} vs {want}");
            }
            let mm = w.momentum_marginal();
            for (iv, &q) in mm.iter().enumerate() {
                assert!((q - fourier_at(&psi, &w.v(iv)).norm_sqr()).abs() < 1e-12);
            }
            assert!((w.total() - 1.0).abs() < 1e-12);
            let s = w.scaled();
            let f = 2f64.powi(d as i32);
            let spm = s.position_marginal();
            assert!(spm.iter().zip(&pm).all(|(a, b)| (a - f * b).abs() < 1e-12));
            let half_measure: f64 = s.momentum_marginal()[3] / f;
            assert!((half_measure - mm[3]).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_form_on_the_grid() {
        let b = LatticeBox::new(1, 6).unwrap();
        let psi = WaveFunction::random(b, 2);
        let w = wigner(&psi, None);
        for xi in [0.0, 0.7, 2.0 * PI / 3.0, 3.5] {
            for iv in [0, 5, 11] {
                let lhs = w.fourier(&[xi], iv);
                let rhs = wigner_fourier(&psi, &[xi], &w.v(iv));
                assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn rescaling_keeps_the_mass() {
        let b = LatticeBox::new(1, 8).unwrap();
        let w = wigner(&WaveFunction::random(b, 4), Some(0.25));
        let mass: f64 = (0..w.m).map(|ix| (0..w.m).map(|iv| w.density(ix, iv)).sum::<f64>() / w.m as f64 * 0.25).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((w.position(3)[0] - 0.25 * w.x(3)[0]).abs() < 1e-15);
    }

    #[test]
    fn continuity_bound() {
        let b = LatticeBox::new(1, 8).unwrap();
        let j = |xi: &[f64], v: &[f64]| Complex64::new((-xi[0] * xi[0]).exp() * (1.0 + 0.5 * v[0].cos()), 0.3 * xi[0].sin());
        let psi = WaveFunction::random(b, 1);
        let same = wigner_continuity(&psi, &psi, j);
        assert_eq!(same.lhs, 0.0);
        assert_eq!(same.rhs, 0.0);
        for seed in 0..100 {
            let phi = WaveFunction::random(b, 1000 + seed);
            let c = wigner_continuity(&psi, &phi, j);
            assert!(c.holds && c.lhs < c.rhs, "{c:?}");
        }
    }
}

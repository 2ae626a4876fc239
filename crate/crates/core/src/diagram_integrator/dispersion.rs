use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionKind {
    /// `e(p) = p^2 / 2` on `R^d`.
    Continuum,
    /// `e(p) = sum_j (1 - cos p_j)` on the torus `[-pi, pi]^d`.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispersion {
    pub kind: DispersionKind,
    pub dim: usize,
}

impl Dispersion {
    pub fn continuum(dim: usize) -> Self {
        Self { kind: DispersionKind::Continuum, dim }
    }

    pub fn discrete(dim: usize) -> Self {
        Self { kind: DispersionKind::Discrete, dim }
    }

    pub fn energy(&self, p: &[f64]) -> f64 {
        match self.kind {
            DispersionKind::Continuum => 0.5 * p.iter().map(|x| x * x).sum::<f64>(),
            DispersionKind::Discrete => p.iter().map(|x| 1.0 - x.cos()).sum(),
        }
    }

    pub fn grad(&self, p: &[f64]) -> Vec<f64> {
        match self.kind {
            DispersionKind::Continuum => p.to_vec(),
            DispersionKind::Discrete => p.iter().map(|x| x.sin()).collect(),
        }
    }

    /// Energy range of the band; the continuum band is unbounded above.
    pub fn band(&self) -> (f64, f64) {
        match self.kind {
            DispersionKind::Continuum => (0.0, f64::INFINITY),
            DispersionKind::Discrete => (0.0, 2.0 * self.dim as f64),
        }
    }

    /// Critical values of `e`: `{0, 2, ..., 2d}` together with the flat-point value `d`
    /// on the lattice, `{0}` in the continuum.
    pub fn critical_values(&self) -> Vec<f64> {
        match self.kind {
            DispersionKind::Continuum => vec![0.0],
            DispersionKind::Discrete => {
                let mut v: Vec<f64> = (0..=self.dim).map(|m| 2.0 * m as f64).collect();
                v.push(self.dim as f64);
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            }
        }
    }

    /// Distance of an energy to the critical values.
    pub fn energy_norm(&self, alpha: f64) -> f64 {
        self.critical_values().iter().map(|c| (alpha - c).abs()).fold(f64::INFINITY, f64::min)
    }

    /// `|||q||| = eta + |q|` in the continuum and `eta +` torus distance to the
    /// nearest critical point `{0, pi}^d` on the lattice.
    pub fn momentum_norm(&self, q: &[f64], eta: f64) -> f64 {
        match self.kind {
            DispersionKind::Continuum => eta + q.iter().map(|x| x * x).sum::<f64>().sqrt(),
            DispersionKind::Discrete => {
                // per coordinate, distance to the nearer of 0 and pi on the circle
                let d2: f64 = q
                    .iter()
                    .map(|&x| {
                        let r = wrap(x).abs();
                        let d = r.min(PI - r);
                        d * d
                    })
                    .sum();
                eta + d2.sqrt()
            }
        }
    }
}

/// Representative of `x` in `[-pi, pi)`.
pub fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_critical_values_in_three_dimensions() {
        let d = Dispersion::discrete(3);
        assert_eq!(d.critical_values(), vec![0.0, 2.0, 3.0, 4.0, 6.0]);
        assert!((d.energy_norm(2.5) - 0.5).abs() < 1e-15);
        assert!((d.energy_norm(3.2) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn energies_and_gradients() {
        let c = Dispersion::continuum(3);
        assert_eq!(c.energy(&[1.0, 2.0, 2.0]), 4.5);
        let d = Dispersion::discrete(2);
        assert!((d.energy(&[PI, PI]) - 4.0).abs() < 1e-15);
        let g = d.grad(&[0.3, -0.2]);
        assert!((g[0] - 0.3f64.sin()).abs() < 1e-15 && (g[1] + 0.2f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn critical_point_distance_on_torus() {
        let d = Dispersion::discrete(3);
        assert!((d.momentum_norm(&[PI, 0.0, -PI], 0.0)).abs() < 1e-12);
        assert!((d.momentum_norm(&[0.1, 0.0, 3.0 * PI - 0.1], 0.01) - (0.01 + (0.02f64).sqrt())).abs() < 1e-12);
    }
}

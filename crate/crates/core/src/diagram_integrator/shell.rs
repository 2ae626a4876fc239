//! Importance samplers concentrated near energy shells `e(p) = a`.

use std::f64::consts::PI;

use rand::Rng;

fn lattice_energy(p: &[f64]) -> f64 {
    p.iter().map(|x| 1.0 - x.cos()).sum()
}

/// Mixture of the uniform law on the torus and slabs `|e(p) - a| < w_k`.
///
/// A slab draws all but the last coordinate uniformly and the last one
/// uniformly on the set allowed by the slab; densities are with respect to
/// the normalized measure `dp / (2 pi)^d`.
#[derive(Debug, Clone)]
pub struct LatticeShell {
    pub a: f64,
    pub widths: Vec<f64>,
}

impl LatticeShell {
    pub fn new(a: f64, widths: Vec<f64>) -> Self {
        Self { a, widths }
    }

    /// Widths `w, 4w, 16w, ...` up to the band width.
    pub fn multiscale(a: f64, w: f64, band: f64) -> Self {
        let mut widths = vec![];
        let mut x = w;
        while x < band {
            widths.push(x);
            x *= 4.0;
        }
        Self { a, widths }
    }

    fn range(&self, w: f64, rest: f64) -> Option<(f64, f64)> {
        let lo = (1.0 + rest - self.a - w).max(-1.0);
        let hi = (1.0 + rest - self.a + w).min(1.0);
        (lo < hi).then(|| (hi.acos(), lo.acos()))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, p: &mut [f64]) {
        let d = p.len();
        for x in p.iter_mut() {
            *x = rng.random_range(-PI..PI);
        }
        let k = rng.random_range(0..=self.widths.len());
        if k == 0 {
            return;
        }
        let rest = lattice_energy(&p[..d - 1]);
        if let Some((u, v)) = self.range(self.widths[k - 1], rest) {
            let r = rng.random_range(u..v);
            p[d - 1] = if rng.random::<bool>() { r } else { -r };
        }
    }

    pub fn density(&self, p: &[f64]) -> f64 {
        let d = p.len();
        let rest = lattice_energy(&p[..d - 1]);
        let x = p[d - 1].abs();
        let slabs: f64 = self
            .widths
            .iter()
            .map(|&w| match self.range(w, rest) {
                Some((u, v)) if x >= u && x <= v => PI / (v - u),
                Some(_) => 0.0,
                None => 1.0,
            })
            .sum();
        (1.0 + slabs) / (1 + self.widths.len()) as f64
    }
}

/// Same construction in the ball `|p| <= zeta` of `R^3` for `e(p) = p^2 / 2`;
/// densities are with respect to Lebesgue measure.
#[derive(Debug, Clone)]
pub struct BallShell {
    pub zeta: f64,
    pub a: f64,
    pub widths: Vec<f64>,
}

impl BallShell {
    pub fn multiscale(zeta: f64, a: f64, w: f64) -> Self {
        let mut widths = vec![];
        let mut x = w;
        while x < 0.5 * zeta * zeta {
            widths.push(x);
            x *= 4.0;
        }
        Self { zeta, a, widths }
    }

    fn radii(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            return (0.0, self.zeta);
        }
        let w = self.widths[k - 1];
        let lo = (2.0 * (self.a - w).max(0.0)).sqrt().min(self.zeta);
        let hi = (2.0 * (self.a + w)).sqrt().min(self.zeta);
        if lo < hi {
            (lo, hi)
        } else {
            (0.0, self.zeta)
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let k = rng.random_range(0..=self.widths.len());
        let (lo, hi) = self.radii(k);
        let r = (lo.powi(3) + rng.random::<f64>() * (hi.powi(3) - lo.powi(3))).cbrt();
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).sqrt();
        [r * s * phi.cos(), r * s * phi.sin(), r * z]
    }

    pub fn density(&self, p: &[f64; 3]) -> f64 {
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > self.zeta {
            return 0.0;
        }
        let total: f64 = (0..=self.widths.len())
            .map(|k| {
                let (lo, hi) = self.radii(k);
                if r >= lo && r <= hi {
                    3.0 / (4.0 * PI * (hi.powi(3) - lo.powi(3)))
                } else {
                    0.0
                }
            })
            .sum();
        total / (1 + self.widths.len()) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;

    #[test]
    fn lattice_density_normalized() {
        let s = LatticeShell::multiscale(2.5, 0.01, 6.0);
        let mut rng = seeded_rng(1);
        // E_q[1/q] = 1 when q is a density w.r.t. the normalized measure
        let n = 200_000;
        let mut p = [0.0; 3];
        let mut acc = 0.0;
        for _ in 0..n {
            s.sample(&mut rng, &mut p);
            acc += 1.0 / s.density(&p);
        }
        assert!((acc / n as f64 - 1.0).abs() < 0.02, "{}", acc / n as f64);
    }

    #[test]
    fn ball_density_normalized() {
        let s = BallShell::multiscale(3.0, 1.0, 0.01);
        let mut rng = seeded_rng(2);
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let p = s.sample(&mut rng);
            acc += 1.0 / s.density(&p);
        }
        let vol = 4.0 * PI * 27.0 / 3.0;
        assert!((acc / n as f64 / vol - 1.0).abs() < 0.02);
    }
}

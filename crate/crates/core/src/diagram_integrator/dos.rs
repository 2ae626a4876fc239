//! Density of states of the lattice dispersion with respect to the
//! normalized measure `dp / (2 pi)^d`, i.e. `rho(a) = int delta(e(p) - a) dp / (2 pi)^d`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::numerics::adaptive_gk_breaks;

/// Complete elliptic integral of the first kind, modulus `k`.
pub fn elliptic_k(k: f64) -> f64 {
    elliptic_k_complement((1.0 - k * k).max(0.0).sqrt())
}

/// `K` as a function of the complementary modulus `k' = sqrt(1 - k^2)`.
/// The logarithmic singularity at `k' = 0` is capped at `k' = 1e-300`.
pub fn elliptic_k_complement(kp: f64) -> f64 {
    let kp = kp.abs().max(1e-300);
    let (mut a, mut b) = (1.0, kp);
    for _ in 0..60 {
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        if (a - b).abs() < 1e-16 * a {
            break;
        }
    }
    PI / (2.0 * a)
}

fn rho1(e: f64) -> f64 {
    if e <= 0.0 || e >= 2.0 {
        0.0
    } else {
        1.0 / (PI * (e * (2.0 - e)).sqrt())
    }
}

fn rho2(e: f64) -> f64 {
    if e <= 0.0 || e >= 4.0 {
        0.0
    } else {
        elliptic_k_complement(0.5 * (e - 2.0)) / (PI * PI)
    }
}

/// Tabulated density of states for `d` in `1..=3`.
#[derive(Debug, Clone)]
pub struct DensityOfStates {
    pub dim: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl DensityOfStates {
    pub fn new(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "lattice density of states tabulated for d <= 3");
        let top = 2.0 * dim as f64;
        let n = 6000 * dim;
        let grid: Vec<f64> = (0..=n).map(|k| top * k as f64 / n as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&e| Self::exact(dim, e)).collect();
        let mut cdf = vec![0.0; grid.len()];
        for k in 1..grid.len() {
            let (a, b) = (grid[k - 1], grid[k]);
            cdf[k] = match dim {
                1 => (1.0 - b).acos() / PI,
                // logarithmic and edge singularities need real quadrature
                2 => cdf[k - 1] + adaptive_gk_breaks(rho2, a, b, &[], 1e-14, 1e-10, 50).value,
                _ => cdf[k - 1] + 0.5 * (b - a) * (values[k - 1] + values[k]),
            };
        }
        Self { dim, grid, values, cdf }
    }

    /// Process-wide cached table.
    pub fn shared(dim: usize) -> &'static DensityOfStates {
        static TABLES: [OnceLock<DensityOfStates>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        assert!((1..=3).contains(&dim), "lattice density of states tabulated for d <= 3");
        TABLES[dim - 1].get_or_init(|| DensityOfStates::new(dim))
    }

    fn exact(dim: usize, e: f64) -> f64 {
        match dim {
            1 => rho1(e),
            2 => rho2(e),
            _ => {
                if e <= 0.0 || e >= 6.0 {
                    return 0.0;
                }
                // rho3(e) = int_0^pi du/pi rho2(e - 1 + cos u)
                let f = |u: f64| rho2(e - 1.0 + u.cos()) / PI;
                let mut br = vec![];
                for target in [0.0, 2.0, 4.0] {
                    let c = target - e + 1.0;
                    if c.abs() <= 1.0 {
                        br.push(c.acos());
                    }
                }
                adaptive_gk_breaks(f, 0.0, PI, &br, 1e-12, 1e-9, 400).value
            }
        }
    }

    pub fn band_top(&self) -> f64 {
        2.0 * self.dim as f64
    }

    /// Piecewise-linear interpolant; `d = 1` and the band edges use the closed form.
    pub fn rho(&self, e: f64) -> f64 {
        if e <= 0.0 || e >= self.band_top() {
            return 0.0;
        }
        if self.dim <= 2 {
            return Self::exact(self.dim, e);
        }
        let h = self.grid[1];
        let k = ((e / h) as usize).min(self.grid.len() - 2);
        let w = (e - self.grid[k]) / h;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// `int_0^e rho`.
    pub fn cdf(&self, e: f64) -> f64 {
        if e <= 0.0 {
            return 0.0;
        }
        if e >= self.band_top() {
            return *self.cdf.last().unwrap();
        }
        let h = self.grid[1];
        let k = ((e / h) as usize).min(self.grid.len() - 2);
        let w = (e - self.grid[k]) / h;
        self.cdf[k] * (1.0 - w) + self.cdf[k + 1] * w
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

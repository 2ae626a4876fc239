//! Exact draws from the normalized level-set measure `delta(e(v) - a) dv`.
//!
//! On the sphere the measure is uniform. On the lattice a point is proposed by
//! picking an axis and two free coordinates and solving for the third; keeping
//! only proposals where the solved axis carries the largest gradient component
//! and accepting with probability proportional to `1 / |d_j e|` gives the
//! co-area density exactly.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diagram_integrator::{Dispersion, DispersionKind};
use crate::error::{Error, Result};
use crate::numerics::Rng64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSampler {
    pub disp: Dispersion,
    pub a: f64,
    /// Lower bound for `max_j |d_j e|` on the shell (lattice only).
    min_grad: f64,
}

impl ShellSampler {
    pub fn new(disp: Dispersion, a: f64) -> Result<Self> {
        if disp.dim != 3 {
            return Err(Error::OutOfRange("shell sampler implemented for d = 3".into()));
        }
        let (lo, hi) = disp.band();
        if !(a > lo && a < hi) {
            return Err(Error::Degenerate(format!("energy {a} outside the open band")));
        }
        let min_grad = match disp.kind {
            DispersionKind::Continuum => (2.0 * a).sqrt(),
            DispersionKind::Discrete => {
                if (a / 2.0 - (a / 2.0).round()).abs() < 1e-3 {
                    return Err(Error::Degenerate(format!("energy {a} too close to a critical value")));
                }
                // grid minimum of the largest gradient component, with a safety margin
                0.8 * lattice_min_grad(a, 400)
            }
        };
        Ok(Self { disp, a, min_grad })
    }

    pub fn sample(&self, rng: &mut Rng64) -> [f64; 3] {
        match self.disp.kind {
            DispersionKind::Continuum => {
                let r0 = (2.0 * self.a).sqrt();
                loop {
                    let g: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
                    let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                    if n > 1e-12 {
                        return g.map(|x| r0 * x / n);
                    }
                }
            }
            DispersionKind::Discrete => loop {
                let j = rng.random_range(0..3);
                let o = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
                let c = 1.0 - self.a + (1.0 - o[0].cos()) + (1.0 - o[1].cos());
                if c.abs() >= 1.0 {
                    continue;
                }
                let s = (1.0 - c * c).sqrt();
                if o[0].sin().abs() > s || o[1].sin().abs() > s {
                    continue;
                }
                if rng.random::<f64>() * s > self.min_grad {
                    continue;
                }
                let x = if rng.random::<bool>() { c.acos() } else { -c.acos() };
                let mut p = [0.0; 3];
                p[j] = x;
                p[(j + 1) % 3] = o[0];
                p[(j + 2) % 3] = o[1];
                return p;
            },
        }
    }

    /// Physical velocity `grad e(v)`.
    pub fn velocity(&self, v: &[f64; 3]) -> [f64; 3] {
        match self.disp.kind {
            DispersionKind::Continuum => *v,
            DispersionKind::Discrete => v.map(f64::sin),
        }
    }
}

fn lattice_min_grad(a: f64, n: usize) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..n {
        for k in 0..n {
            let o0 = -PI + 2.0 * PI * (i as f64 + 0.5) / n as f64;
            let o1 = -PI + 2.0 * PI * (k as f64 + 0.5) / n as f64;
            let c = 1.0 - a + (1.0 - o0.cos()) + (1.0 - o1.cos());
            if c.abs() >= 1.0 {
                continue;
            }
            let s = (1.0 - c * c).sqrt();
            if o0.sin().abs() <= s && o1.sin().abs() <= s {
                m = m.min(s);
            }
        }
    }
    m
}

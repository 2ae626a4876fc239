use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jump::{simulate, JumpKernel};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, seeded_rng};

/// Initial phase-space law of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InitialLaw {
    /// Position at the origin, momentum uniform on the shell.
    Equilibrium,
    /// Position at the origin, every particle with the same momentum.
    FixedMomentum { momentum: [f64; 3] },
    /// Isotropic Gaussian positions, momentum uniform on the shell.
    GaussianPosition { sigma: f64 },
}

/// Particle positions and momenta at time `t`, together with the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    pub t: f64,
    pub seed: u64,
    pub initial_positions: Vec<[f64; 3]>,
    pub initial_states: Vec<[f64; 3]>,
    pub positions: Vec<[f64; 3]>,
    pub states: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Normalized by the total particle count and bin width.
    pub density: Vec<f64>,
    /// At least 100 particles per bin on average.
    pub resolved: bool,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position_covariance(&self) -> [[f64; 3]; 3] {
        let n = self.len() as f64;
        let m: [f64; 3] = std::array::from_fn(|i| self.positions.iter().map(|x| x[i]).sum::<f64>() / n);
        std::array::from_fn(|i| {
            std::array::from_fn(|j| self.positions.iter().map(|x| (x[i] - m[i]) * (x[j] - m[j])).sum::<f64>() / (n - 1.0))
        })
    }

    /// Histogram of one position coordinate on `[-half_width, half_width]`.
    pub fn position_histogram(&self, axis: usize, bins: usize, half_width: f64) -> Histogram {
        let w = 2.0 * half_width / bins as f64;
        let mut counts = vec![0u64; bins];
        for x in &self.positions {
            let k = ((x[axis] + half_width) / w).floor();
            if k >= 0.0 && (k as usize) < bins {
                counts[k as usize] += 1;
            }
        }
        let n = self.len() as f64;
        Histogram {
            edges: (0..=bins).map(|k| -half_width + k as f64 * w).collect(),
            density: counts.iter().map(|&c| c as f64 / (n * w)).collect(),
            resolved: self.len() >= 100 * bins,
            counts,
        }
    }

    /// Fractions of momenta in the 24 cells given by the sign pattern and the
    /// axis of the largest component; each cell has mass `1/24` in equilibrium
    /// for a cubically symmetric shell.
    pub fn velocity_cells(&self) -> [f64; 24] {
        let mut c = [0.0; 24];
        for v in &self.states {
            let signs = (v[0] < 0.0) as usize | ((v[1] < 0.0) as usize) << 1 | ((v[2] < 0.0) as usize) << 2;
            let a = (0..3).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap();
            c[signs * 3 + a] += 1.0;
        }
        c.map(|x| x / self.len() as f64)
    }

    /// Total variation distance of the cell fractions to the uniform law.
    pub fn tv_to_equilibrium(&self) -> f64 {
        0.5 * self.velocity_cells().iter().map(|p| (p - 1.0 / 24.0).abs()).sum::<f64>()
    }
}

/// Particle method for the linear Boltzmann equation: free flight between
/// exponential collision times, fresh shell momentum at each collision.
pub fn boltzmann_particle_sim(kernel: &JumpKernel, init: &InitialLaw, t: f64, particles: usize, seed: u64) -> Result<ParticleEnsemble> {
    if particles < 2 || !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("particles = {particles}, T = {t}")));
    }
    if let InitialLaw::FixedMomentum { momentum } = init {
        let e = kernel.shell.disp.energy(momentum);
        if (e - kernel.shell.a).abs() > 1e-9 {
            return Err(Error::Invariant(format!("initial momentum has energy {e}, shell is {}", kernel.shell.a)));
        }
    }
    let shards = 16usize;
    type Row = ([f64; 3], [f64; 3], [f64; 3], [f64; 3]);
    let rows: Vec<Vec<Row>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(derive_seed(seed, s as u64));
            (particles * s / shards..particles * (s + 1) / shards)
                .map(|_| {
                    let (x0, v0) = match *init {
                        InitialLaw::Equilibrium => ([0.0; 3], kernel.shell.sample(&mut rng)),
                        InitialLaw::FixedMomentum { momentum } => ([0.0; 3], momentum),
                        InitialLaw::GaussianPosition { sigma } => {
                            let x: [f64; 3] = std::array::from_fn(|_| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                sigma * z
                            });
                            (x, kernel.shell.sample(&mut rng))
                        }
                    };
                    let tr = simulate(kernel, x0, v0, t, &mut rng);
                    (x0, v0, tr.final_position(), *tr.states.last().unwrap())
                })
                .collect()
        })
        .collect();
    let mut out = ParticleEnsemble {
        t,
        seed,
        initial_positions: Vec::with_capacity(particles),
        initial_states: Vec::with_capacity(particles),
        positions: Vec::with_capacity(particles),
        states: Vec::with_capacity(particles),
    };
    for (x0, v0, x, v) in rows.into_iter().flatten() {
        out.initial_positions.push(x0);
        out.initial_states.push(v0);
        out.positions.push(x);
        out.states.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram_integrator::Dispersion;

    #[test]
    fn zero_kernel_is_free_transport() {
        let k = JumpKernel::zero(Dispersion::discrete(3), 2.5).unwrap();
        let e = boltzmann_particle_sim(&k, &InitialLaw::GaussianPosition { sigma: 2.0 }, 3.0, 500, 9).unwrap();
        for i in 0..e.len() {
            let v = k.velocity(&e.initial_states[i]);
            for c in 0..3 {
                assert!((e.positions[i][c] - e.initial_positions[i][c] - 3.0 * v[c]).abs() < 1e-12);
            }
            assert_eq!(e.states[i], e.initial_states[i]);
        }
    }

    #[test]
    fn velocity_cells_relax_to_uniform() {
        let k = JumpKernel::uniform_shell(Dispersion::discrete(3), 2.5, 1.0).unwrap();
        let p = [0.3, 0.2, 0.0];
        let e = Dispersion::discrete(3).energy(&[0.3, 0.2, 0.0]);
        let c = (1.0 - (2.5 - e)).acos();
        let init = InitialLaw::FixedMomentum { momentum: [p[0], p[1], c] };
        let tv: Vec<f64> = [0.0, 0.5, 2.0, 6.0]
            .iter()
            .map(|&t| boltzmann_particle_sim(&k, &init, t, 20_000, 4).unwrap().tv_to_equilibrium())
            .collect();
        assert!(tv.windows(2).all(|w| w[1] < w[0]), "{tv:?}");
        assert!(tv[3] < 0.03);
    }

    #[test]
    fn off_shell_start_rejected() {
        let k = JumpKernel::uniform_sphere(1.0).unwrap();
        let init = InitialLaw::FixedMomentum { momentum: [2.0, 0.0, 0.0] };
        assert!(matches!(boltzmann_particle_sim(&k, &init, 1.0, 10, 1), Err(Error::Invariant(_))));
    }
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shell_sampler::ShellSampler;
use crate::diagram_integrator::Dispersion;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, fit_line, seeded_rng, LineFit, Rng64, RunningStats};

/// Collision kernel `sigma(v, u) = rate * (uniform probability on the shell of v)`.
///
/// The total rate does not depend on `v`, so the post-collision momentum is a
/// fresh draw from the shell measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpKernel {
    pub shell: ShellSampler,
    pub rate: f64,
}

impl JumpKernel {
    pub fn uniform_shell(disp: Dispersion, a: f64, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::OutOfRange(format!("total collision rate {rate}")));
        }
        Ok(Self { shell: ShellSampler::new(disp, a)?, rate })
    }

    /// Uniform kernel on the unit sphere `S^2` (`|v|^2 / 2 = 1/2`).
    pub fn uniform_sphere(rate: f64) -> Result<Self> {
        Self::uniform_shell(Dispersion::continuum(3), 0.5, rate)
    }

    /// No collisions: free transport.
    pub fn zero(disp: Dispersion, a: f64) -> Result<Self> {
        Self::uniform_shell(disp, a, 0.0)
    }

    /// `(L f)(v) = rate * (<f>_shell - f(v))`.
    pub fn generator<F: Fn(&[f64; 3]) -> f64>(&self, f: F, v: &[f64; 3], shell_mean_samples: u64, seed: u64) -> f64 {
        let mut rng = seeded_rng(seed);
        let mut st = RunningStats::new();
        for _ in 0..shell_mean_samples {
            st.push(f(&self.shell.sample(&mut rng)));
        }
        self.rate * (st.mean - f(v))
    }

    pub fn velocity(&self, v: &[f64; 3]) -> [f64; 3] {
        self.shell.velocity(v)
    }
}

/// Piecewise-constant momentum path with exactly integrated position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t_end: f64,
    /// Collision times in `(0, t_end)`.
    pub jump_times: Vec<f64>,
    /// Momentum before the first jump, then after each jump.
    pub states: Vec<[f64; 3]>,
    /// Velocities `grad e` of the states.
    pub velocities: Vec<[f64; 3]>,
    /// Position at time 0 and at each jump time.
    pub positions: Vec<[f64; 3]>,
}

impl Trajectory {
    fn segment(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    pub fn state_at(&self, t: f64) -> [f64; 3] {
        self.states[self.segment(t)]
    }

    pub fn velocity_at(&self, t: f64) -> [f64; 3] {
        self.velocities[self.segment(t)]
    }

    pub fn position_at(&self, t: f64) -> [f64; 3] {
        let k = self.segment(t);
        let t0 = if k == 0 { 0.0 } else { self.jump_times[k - 1] };
        let (x, v) = (self.positions[k], self.velocities[k]);
        std::array::from_fn(|i| x[i] + v[i] * (t - t0))
    }

    pub fn final_position(&self) -> [f64; 3] {
        self.position_at(self.t_end)
    }
}

pub(crate) fn simulate(kernel: &JumpKernel, x0: [f64; 3], v0: [f64; 3], t_end: f64, rng: &mut Rng64) -> Trajectory {
    let mut tr = Trajectory {
        t_end,
        jump_times: Vec::new(),
        states: vec![v0],
        velocities: vec![kernel.velocity(&v0)],
        positions: vec![x0],
    };
    if kernel.rate == 0.0 {
        return tr;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / kernel.rate;
        if t + dt >= t_end {
            return tr;
        }
        t += dt;
        let x = *tr.positions.last().unwrap();
        let w = *tr.velocities.last().unwrap();
        tr.positions.push(std::array::from_fn(|i| x[i] + w[i] * dt));
        let v = kernel.shell.sample(rng);
        tr.jump_times.push(t);
        tr.states.push(v);
        tr.velocities.push(kernel.velocity(&v));
    }
}

/// Jump process on `[0, t_end]` started from the shell equilibrium at the origin.
pub fn jump_process(kernel: &JumpKernel, t_end: f64, seed: u64) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::OutOfRange(format!("T = {t_end}")));
    }
    let mut rng = seeded_rng(seed);
    let v0 = kernel.shell.sample(&mut rng);
    Ok(simulate(kernel, [0.0; 3], v0, t_end, &mut rng))
}

/// Jump process started from a given momentum at the origin.
pub fn jump_process_from(kernel: &JumpKernel, v0: [f64; 3], t_end: f64, seed: u64) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::OutOfRange(format!("T = {t_end}")));
    }
    let mut rng = seeded_rng(seed);
    Ok(simulate(kernel, [0.0; 3], v0, t_end, &mut rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenKuboJumpReport {
    pub t_max: f64,
    pub trials: usize,
    /// `int_0^{T_max} E[grad e(v(0)) (x) grad e(v(t))] dt`, symmetrized.
    pub matrix: [[f64; 3]; 3],
    pub std_errors: [[f64; 3]; 3],
    /// `trace / d`, the scalar convention with the `1/d` normalization.
    pub trace_over_d: f64,
    pub times: Vec<f64>,
    /// `E[grad e(v(0)) . grad e(v(t))]` on `times`.
    pub integrand_trace: Vec<f64>,
    /// Same-time correlation matrix.
    pub c0: [[f64; 3]; 3],
    /// Fit of `ln integrand_trace` against `t` over the first part of the window.
    pub decay_fit: LineFit,
    pub tail_ratio: f64,
    pub seed: u64,
}

/// Velocity autocorrelation integral from equilibrium-started trajectories.
///
/// The time integral of `grad e(v(t))` along a path is its displacement, so each
/// trajectory contributes `grad e(v(0)) (x) x(T_max)` without time discretization.
pub fn green_kubo_jump(kernel: &JumpKernel, t_max: f64, trials: usize, seed: u64) -> Result<GreenKuboJumpReport> {
    if kernel.rate <= 0.0 {
        return Err(Error::OutOfRange("Green-Kubo integral needs a positive collision rate".into()));
    }
    if !(t_max > 0.0) || trials < 2 {
        return Err(Error::OutOfRange(format!("T_max = {t_max}, trials = {trials}")));
    }
    let grid = 41usize;
    let times: Vec<f64> = (0..grid).map(|k| t_max * k as f64 / (grid - 1) as f64).collect();
    let shards = 16usize;
    #[derive(Clone)]
    struct Acc {
        d: Vec<RunningStats>,
        c0: Vec<RunningStats>,
        curve: Vec<RunningStats>,
    }
    let parts: Vec<Acc> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(derive_seed(seed, s as u64));
            let mut acc = Acc {
                d: vec![RunningStats::new(); 9],
                c0: vec![RunningStats::new(); 9],
                curve: vec![RunningStats::new(); grid],
            };
            for _ in trials * s / shards..trials * (s + 1) / shards {
                let v0 = kernel.shell.sample(&mut rng);
                let tr = simulate(kernel, [0.0; 3], v0, t_max, &mut rng);
                let g0 = tr.velocities[0];
                let x = tr.final_position();
                for i in 0..3 {
                    for j in 0..3 {
                        // symmetrize per sample so the error bars refer to the reported matrix
                        acc.d[3 * i + j].push(0.5 * (g0[i] * x[j] + g0[j] * x[i]));
                        acc.c0[3 * i + j].push(g0[i] * g0[j]);
                    }
                }
                for (c, &t) in acc.curve.iter_mut().zip(&times) {
                    let g = tr.velocity_at(t);
                    c.push(g0[0] * g[0] + g0[1] * g[1] + g0[2] * g[2]);
                }
            }
            acc
        })
        .collect();
    let mut tot = parts[0].clone();
    for p in &parts[1..] {
        tot.d.iter_mut().zip(&p.d).for_each(|(a, b)| a.merge(b));
        tot.c0.iter_mut().zip(&p.c0).for_each(|(a, b)| a.merge(b));
        tot.curve.iter_mut().zip(&p.curve).for_each(|(a, b)| a.merge(b));
    }
    let matrix: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| tot.d[3 * i + j].mean));
    let std_errors: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| tot.d[3 * i + j].std_error()));
    let c0: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| tot.c0[3 * i + j].mean));
    let integrand_trace: Vec<f64> = tot.curve.iter().map(|c| c.mean).collect();
    let tail_se = tot.curve[grid - 1].std_error();
    let tail_ratio = integrand_trace[grid - 1].abs() / integrand_trace[0];
    if integrand_trace[grid - 1].abs() - 3.0 * tail_se > 0.02 * integrand_trace[0] {
        return Err(Error::Convergence(format!(
            "correlation tail at T_max = {t_max} is {tail_ratio:.3} of its initial value"
        )));
    }
    // fit the log-decay where the signal is well above the noise
    let (fx, fy): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&integrand_trace)
        .zip(&tot.curve)
        .filter(|((_, &c), st)| c > 10.0 * st.std_error() && c > 0.0)
        .map(|((&t, &c), _)| (t, c.ln()))
        .unzip();
    let decay_fit = if fx.len() >= 2 { fit_line(&fx, &fy) } else { LineFit { slope: f64::NAN, intercept: f64::NAN, slope_std_error: f64::NAN } };
    Ok(GreenKuboJumpReport {
        t_max,
        trials,
        trace_over_d: (matrix[0][0] + matrix[1][1] + matrix[2][2]) / 3.0,
        matrix,
        std_errors,
        times,
        integrand_trace,
        c0,
        decay_fit,
        tail_ratio,
        seed,
    })
}

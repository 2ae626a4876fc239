use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagram_integrator::{level_set_integral, Dispersion};
use crate::error::Result;

/// Diffusion matrix with both scalar conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionMatrix {
    pub a: f64,
    pub matrix: [[f64; 3]; 3],
    pub std_errors: [[f64; 3]; 3],
    /// `trace / d`.
    pub trace_over_d: f64,
    /// Full trace, the convention without the `1/d`.
    pub trace: f64,
    pub samples: u64,
    pub seed: u64,
}

impl DiffusionMatrix {
    pub fn max_off_diagonal(&self) -> f64 {
        let m = &self.matrix;
        [m[0][1], m[0][2], m[1][2]].iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Shell average `<grad e (x) grad e>_a` with co-area weights.
pub fn diffusion_matrix_surface(disp: &Dispersion, a: f64, samples: u64, seed: u64) -> Result<DiffusionMatrix> {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let raw = level_set_integral(disp, a, 7, samples, seed, |p, buf| {
        let g = disp.grad(p);
        buf[0] = Complex64::new(1.0, 0.0);
        for (b, &(i, j)) in buf[1..].iter_mut().zip(&PAIRS) {
            *b = Complex64::new(g[i] * g[j], 0.0);
        }
    })?;
    let (norm, norm_se) = (raw[0].0.re, raw[0].1);
    let mut matrix = [[0.0; 3]; 3];
    let mut std_errors = [[0.0; 3]; 3];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let (num, se) = (raw[k + 1].0.re, raw[k + 1].1);
        let r = num / norm;
        // ratio error without the covariance term, which only makes it larger
        let e = (se * se + r * r * norm_se * norm_se).sqrt() / norm;
        matrix[i][j] = r;
        matrix[j][i] = r;
        std_errors[i][j] = e;
        std_errors[j][i] = e;
    }
    let trace = matrix[0][0] + matrix[1][1] + matrix[2][2];
    Ok(DiffusionMatrix { a, matrix, std_errors, trace_over_d: trace / 3.0, trace, samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_gives_two_a_over_three() {
        let a = 0.5;
        let d = diffusion_matrix_surface(&Dispersion::continuum(3), a, 200_000, 1).unwrap();
        for i in 0..3 {
            assert!((d.matrix[i][i] / (2.0 * a / 3.0) - 1.0).abs() < 0.03, "{:?}", d.matrix);
        }
        assert!(d.max_off_diagonal() < 0.01);
    }

    #[test]
    fn lattice_matrix_is_isotropic() {
        let d = diffusion_matrix_surface(&Dispersion::discrete(3), 2.5, 300_000, 2).unwrap();
        assert!(d.max_off_diagonal() < 1e-2, "{:?}", d.matrix);
        let m = d.trace_over_d;
        assert!((0..3).all(|i| (d.matrix[i][i] / m - 1.0).abs() < 0.03));
    }

    #[test]
    fn critical_energy_is_degenerate() {
        assert!(diffusion_matrix_surface(&Dispersion::discrete(3), 4.0, 100, 1).is_err());
    }
}

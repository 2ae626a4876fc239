use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dispersion::{Dispersion, DispersionKind};
use super::dos::DensityOfStates;
use crate::error::{Error, Result};
use rand::Rng;

use crate::numerics::{adaptive_gk_breaks, seeded_rng};

/// `|B^(k)|^2` profile of the continuum model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FormFactor {
    /// `|B^| = 1` for `|q| <= cutoff`.
    Unit { cutoff: f64 },
    /// `|B^(k)|^2 = exp(-k^2)`.
    Gaussian,
}

/// Dispersion plus scattering measure. Lattice momenta carry the normalized
/// measure `dp / (2 pi)^d`; continuum momenta (always `d = 3`) carry Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Lattice { dim: usize },
    Continuum { form: FormFactor },
}

impl Model {
    pub fn lattice3() -> Self {
        Model::Lattice { dim: 3 }
    }

    pub fn dispersion(&self) -> Dispersion {
        match self {
            Model::Lattice { dim } => Dispersion::discrete(*dim),
            Model::Continuum { .. } => Dispersion::continuum(3),
        }
    }

    /// `I(a) = int delta(e(v) - a) dv` in the model's momentum measure
    /// (the continuum unit form factor restricts to `|v| <= cutoff`).
    pub fn level_set_measure(&self, a: f64) -> f64 {
        match self {
            Model::Lattice { dim } => DensityOfStates::shared(*dim).rho(a),
            Model::Continuum { form } => {
                if a <= 0.0 {
                    return 0.0;
                }
                let r = (2.0 * a).sqrt();
                match form {
                    FormFactor::Unit { cutoff } if r > *cutoff => 0.0,
                    _ => 4.0 * PI * r,
                }
            }
        }
    }

    /// Energy density of the Born kernel: `int |B^(p-q)|^2 delta(e(q) - E) dq` at `e(p) = a`.
    fn kernel(&self, a: f64, e: f64) -> f64 {
        match self {
            Model::Lattice { dim } => DensityOfStates::shared(*dim).rho(e),
            Model::Continuum { form } => {
                if e <= 0.0 {
                    return 0.0;
                }
                let q = (2.0 * e).sqrt();
                match form {
                    FormFactor::Unit { cutoff } => {
                        if q <= *cutoff {
                            4.0 * PI * q
                        } else {
                            0.0
                        }
                    }
                    FormFactor::Gaussian => {
                        let p = (2.0 * a.max(0.0)).sqrt();
                        // angular average of exp(-|p - q|^2) times q^2 dq / dE = q
                        let ang = if p * q < 1e-8 {
                            4.0 * PI * (-(p * p + q * q)).exp()
                        } else {
                            PI / (p * q) * ((-(p - q) * (p - q)).exp() - (-(p + q) * (p + q)).exp())
                        };
                        q * ang
                    }
                }
            }
        }
    }

    fn kernel_support(&self, a: f64) -> (f64, f64) {
        match self {
            Model::Lattice { dim } => (0.0, 2.0 * *dim as f64),
            Model::Continuum { form: FormFactor::Unit { cutoff } } => (0.0, 0.5 * cutoff * cutoff),
            Model::Continuum { form: FormFactor::Gaussian } => {
                let q = (2.0 * a.max(0.0)).sqrt() + 7.0;
                (0.0, 0.5 * q * q)
            }
        }
    }

    fn kernel_breaks(&self) -> Vec<f64> {
        match self {
            Model::Lattice { dim } => (0..=2 * dim).map(|m| m as f64).collect(),
            Model::Continuum { .. } => vec![],
        }
    }
}

/// `int_lo^hi f(E) / (a - E - i eta) dE`; `eta = 0` gives the `eta -> 0+` limit
/// (principal value plus `i pi f(a)`).
pub fn stieltjes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, a: f64, eta: f64, breaks: &[f64]) -> (Complex64, f64) {
    let mut br: Vec<f64> = breaks.to_vec();
    br.push(a);
    if eta > 0.0 {
        br.extend([a - eta, a + eta, a - 10.0 * eta, a + 10.0 * eta]);
        let re = adaptive_gk_breaks(|e| f(e) * (a - e) / ((a - e).powi(2) + eta * eta), lo, hi, &br, 1e-11, 1e-9, 4000);
        let im = adaptive_gk_breaks(|e| f(e) * eta / ((a - e).powi(2) + eta * eta), lo, hi, &br, 1e-11, 1e-9, 4000);
        (Complex64::new(re.value, im.value), re.error + im.error)
    } else {
        let inside = a > lo && a < hi;
        let fa = if inside { f(a) } else { 0.0 };
        let g = |e: f64| {
            if (e - a).abs() < 1e-12 {
                0.0
            } else {
                (f(e) - fa) / (a - e)
            }
        };
        let re = adaptive_gk_breaks(g, lo, hi, &br, 1e-11, 1e-9, 4000);
        let mut re_v = re.value;
        if inside {
            re_v += fa * ((a - lo) / (hi - a)).ln();
        } else if fa != 0.0 {
            unreachable!()
        }
        (Complex64::new(re_v, PI * fa), re.error)
    }
}

/// Born self-energy `theta(p) = int |B^(p-q)|^2 dq / (e(p) - e(q) - i eta)`,
/// computed directly with a quadrature error estimate.
pub fn self_energy_theta(model: &Model, p: &[f64], eta: f64) -> Result<(Complex64, f64)> {
    if eta < 0.0 {
        return Err(Error::OutOfRange(format!("eta = {eta} must be >= 0")));
    }
    let a = model.dispersion().energy(p);
    let (lo, hi) = model.kernel_support(a);
    let (v, err) = stieltjes(|e| model.kernel(a, e), lo, hi, a, eta, &model.kernel_breaks());
    if !(err <= 1e-5 * v.norm().max(1e-3)) {
        return Err(Error::Convergence(format!("self-energy quadrature error {err:.2e}")));
    }
    Ok((v, err))
}

/// Tabulated `theta` as a function of the energy `e(p)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfEnergy {
    pub model: Model,
    pub eta: f64,
    pub a_max: f64,
    values: Vec<Complex64>,
}

impl SelfEnergy {
    /// Born approximation of the self-consistent equation.
    pub fn born(model: Model, eta: f64) -> Result<Self> {
        let a_max = match model {
            Model::Lattice { dim } => 2.0 * dim as f64,
            Model::Continuum { form: FormFactor::Unit { cutoff } } => 0.5 * cutoff * cutoff,
            Model::Continuum { form: FormFactor::Gaussian } => 18.0,
        };
        let n = 1200;
        if let Model::Lattice { dim } = model {
            let dos = DensityOfStates::shared(dim);
            let grid = dos.grid();
            let h = grid[1] - grid[0];
            if eta >= 3.0 * h {
                // trapezoid sum over the tabulated density resolves the width-eta Lorentzian
                let rho: Vec<f64> = grid.iter().map(|&e| dos.rho(e)).collect();
                let values = (0..=n)
                    .map(|k| {
                        let a = a_max * k as f64 / n as f64;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, (&e, &r)) in grid.iter().zip(&rho).enumerate() {
                            let w = if j == 0 || j + 1 == grid.len() { 0.5 * h } else { h };
                            acc += w * r / Complex64::new(a - e, -eta);
                        }
                        acc
                    })
                    .collect();
                return Ok(Self { model, eta, a_max, values });
            }
        }
        let mut values = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let a = a_max * k as f64 / n as f64;
            let (lo, hi) = model.kernel_support(a);
            // endpoints of the lattice band: use the one-sided limit
            let a_eval = a.clamp(1e-9, a_max - 1e-9);
            let (v, _) = stieltjes(|e| model.kernel(a_eval, e), lo, hi, a_eval, eta, &model.kernel_breaks());
            values.push(v);
        }
        Ok(Self { model, eta, a_max, values })
    }

    /// Fixed-point refinement `theta <- int rho(E) dE / (a + lambda^2 theta(a) - E - lambda^2 theta(E) - i eta)`
    /// on the lattice. Requires `eta > 0`.
    pub fn refine(&self, lambda: f64, iterations: usize) -> Result<Self> {
        let dim = match self.model {
            Model::Lattice { dim } => dim,
            Model::Continuum { .. } => return Err(Error::OutOfRange("refinement implemented for the lattice model".into())),
        };
        if self.eta <= 0.0 {
            return Err(Error::OutOfRange("refinement needs eta > 0".into()));
        }
        let dos = DensityOfStates::shared(dim);
        let l2 = lambda * lambda;
        let mut cur = self.clone();
        let breaks: Vec<f64> = (0..=2 * dim).map(|m| m as f64).collect();
        for _ in 0..iterations {
            let n = cur.values.len() - 1;
            let mut next = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let a = cur.a_max * k as f64 / n as f64;
                let z = Complex64::new(a, -cur.eta) + l2 * cur.theta_at(a);
                let g = |e: f64| dos.rho(e) / (z - e - l2 * cur.theta_at(e));
                let mut br = breaks.clone();
                br.push(a);
                let re = adaptive_gk_breaks(|e| g(e).re, 0.0, cur.a_max, &br, 1e-10, 1e-8, 4000);
                let im = adaptive_gk_breaks(|e| g(e).im, 0.0, cur.a_max, &br, 1e-10, 1e-8, 4000);
                next.push(Complex64::new(re.value, im.value));
            }
            cur.values = next;
        }
        Ok(cur)
    }

    pub fn theta_at(&self, a: f64) -> Complex64 {
        let n = self.values.len() - 1;
        let x = (a / self.a_max * n as f64).clamp(0.0, n as f64);
        let k = (x as usize).min(n - 1);
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn theta(&self, p: &[f64]) -> Complex64 {
        self.theta_at(self.model.dispersion().energy(p))
    }

    pub fn max_im(&self) -> f64 {
        self.values.iter().map(|v| v.im).fold(0.0, f64::max)
    }
}

/// `sigma(a) = eta int rho(E) dE / |omega(a) - omega(E) + i eta|^2` with
/// `omega = e + lambda^2 theta`; tends to `Im theta(a)` as `eta, lambda -> 0`.
pub fn sigma_regularized(se: &SelfEnergy, lambda: f64, eta: f64, a: f64) -> f64 {
    let l2 = lambda * lambda;
    let om = |e: f64| Complex64::new(e, 0.0) + l2 * se.theta_at(e);
    let oa = om(a);
    let (lo, hi) = se.model.kernel_support(a);
    let mut br = se.model.kernel_breaks();
    br.extend([a, a - eta, a + eta]);
    let f = |e: f64| {
        let d = oa - om(e) + Complex64::new(0.0, eta);
        se.model.kernel(a, e) * eta / d.norm_sqr()
    };
    adaptive_gk_breaks(f, lo, hi.min(se.a_max), &br, 1e-11, 1e-9, 4000).value
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResummationReport {
    pub lambda: f64,
    pub eta: f64,
    pub points: usize,
    pub terms: usize,
    /// Largest `|partial sum - 1 / (alpha - omega - i eta)|` relative to the closed form.
    pub max_rel_error: f64,
    /// Largest modulus of the series ratio `lambda^2 theta R_0` among the points.
    pub max_ratio: f64,
}

/// Series `sum_{k <= K} R_0 (lambda^2 theta R_0)^k` with the bare resolvent
/// `R_0 = 1 / (alpha - e(p) - i eta)`, against the renormalized resolvent
/// `1 / (alpha - omega(p) - i eta)`, `omega = e + lambda^2 theta`, at random
/// `(alpha, p)` where the ratio has modulus at most `1/2`.
pub fn resummation_check(se: &SelfEnergy, lambda: f64, eta: f64, points: usize, terms: usize, seed: u64) -> Result<ResummationReport> {
    let disp = se.model.dispersion();
    let (lo, hi) = disp.band();
    let hi = if hi.is_finite() { hi } else { se.a_max };
    let l2 = lambda * lambda;
    let mut rng = seeded_rng(seed);
    let mut max_rel_error: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut found = 0;
    let mut tries = 0;
    while found < points {
        tries += 1;
        if tries > 1000 * points.max(1) {
            return Err(Error::Degenerate("no points with a convergent series".into()));
        }
        let p: Vec<f64> = match disp.kind {
            DispersionKind::Discrete => (0..disp.dim).map(|_| rng.random_range(-PI..PI)).collect(),
            DispersionKind::Continuum => {
                let r = (2.0 * hi).sqrt();
                (0..disp.dim).map(|_| rng.random_range(-r..r)).collect()
            }
        };
        let alpha = rng.random_range(lo - 1.0..hi + 1.0);
        let e = disp.energy(&p);
        if e > se.a_max {
            continue;
        }
        let th = se.theta_at(e);
        let r0 = 1.0 / Complex64::new(alpha - e, -eta);
        let ratio = l2 * th * r0;
        if ratio.norm() > 0.5 {
            continue;
        }
        let closed = 1.0 / (Complex64::new(alpha, -eta) - e - l2 * th);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = r0;
        for _ in 0..=terms {
            acc += pow;
            pow *= ratio;
        }
        max_rel_error = max_rel_error.max((acc - closed).norm() / closed.norm());
        max_ratio = max_ratio.max(ratio.norm());
        found += 1;
    }
    Ok(ResummationReport { lambda, eta, points, terms, max_rel_error, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuum_unit_form_factor_imaginary_part() {
        let m = Model::Continuum { form: FormFactor::Unit { cutoff: 4.0 } };
        for a in [0.3, 0.5, 1.2] {
            let p = [0.0, 0.0, (2.0f64 * a).sqrt()];
            let (th, _) = self_energy_theta(&m, &p, 0.0).unwrap();
            let want = PI * 4.0 * PI * (2.0f64 * a).sqrt();
            assert!((th.im - want).abs() < 1e-8 * want, "{} {}", th.im, want);
        }
    }

    #[test]
    fn lattice_imaginary_part_is_pi_rho() {
        let m = Model::lattice3();
        let dos = DensityOfStates::shared(3);
        for a in [0.7, 2.5, 3.3, 5.1] {
            let p = [(1.0f64 - a / 3.0).acos(); 3];
            let (th, _) = self_energy_theta(&m, &p, 0.0).unwrap();
            let e = Dispersion::discrete(3).energy(&p);
            assert!((e - a).abs() < 1e-12);
            assert!((th.im - PI * dos.rho(a)).abs() < 1e-9);
        }
    }

    #[test]
    fn positive_eta_converges_to_limit() {
        let m = Model::lattice3();
        let p = [1.0, 1.3, 0.4];
        let (lim, _) = self_energy_theta(&m, &p, 0.0).unwrap();
        let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&eta| (self_energy_theta(&m, &p, eta).unwrap().0 - lim).norm())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 5e-3, "{gaps:?}");
    }

    #[test]
    fn table_matches_direct() {
        let se = SelfEnergy::born(Model::lattice3(), 1e-2).unwrap();
        let p = [0.9, -2.0, 0.3];
        let (d, _) = self_energy_theta(&Model::lattice3(), &p, 1e-2).unwrap();
        assert!((se.theta(&p) - d).norm() < 2e-3 * d.norm());
    }

    #[test]
    fn born_series_resums_to_the_renormalized_resolvent() {
        let se = SelfEnergy::born(Model::lattice3(), 1e-2).unwrap();
        let r = resummation_check(&se, 0.3, 1e-2, 20, 60, 4).unwrap();
        assert!(r.max_ratio <= 0.5);
        assert!(r.max_rel_error < 1e-12, "{r:?}");
        // too few terms leaves a visible truncation error
        let short = resummation_check(&se, 0.3, 1e-2, 20, 1, 4).unwrap();
        assert!(short.max_rel_error > 1e-6);
    }
}

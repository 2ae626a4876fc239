//! Resummation of ladder terms in the diffusive main term: the geometric
//! series in `b`, its Fourier integral, and the two-resolvent key lemma.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use super::level_set::level_set_integral;
use super::self_energy::{Model, SelfEnergy};
use super::shell::LatticeShell;
use crate::error::{Error, Result};
use crate::numerics::{adaptive_gk_breaks, gauss_legendre, integrate_gl, seeded_rng, ComplexStats};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sum_{k=0}^{K} (-i / (b - i))^{k+1} (1 + B^2 / (b - i)^2)^{k+1}`.
pub fn geometric_partial_sum(b: Complex64, big_b: f64, terms: usize) -> Complex64 {
    let z = b - I;
    let r = -I / z * (1.0 + big_b * big_b / (z * z));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = r;
    for _ in 0..=terms {
        acc += pow;
        pow *= r;
    }
    acc
}

/// `(-i) ((b - i)^2 + B^2) / ((b - i)^3 + i (b - i)^2 + i B^2)`.
pub fn geometric_closed_form(b: Complex64, big_b: f64) -> Complex64 {
    let z = b - I;
    let b2 = big_b * big_b;
    -I * (z * z + b2) / (z * z * z + I * z * z + I * b2)
}

/// Ratio of the geometric series; the sum converges when its modulus is below 1.
pub fn geometric_ratio(b: Complex64, big_b: f64) -> f64 {
    let z = b - I;
    (-I / z * (1.0 + big_b * big_b / (z * z))).norm()
}

/// Roots of `z^3 + i z^2 + i B^2` by Durand-Kerner iteration.
fn cubic_roots(big_b: f64) -> [Complex64; 3] {
    let b2 = big_b * big_b;
    let p = |z: Complex64| z * z * z + I * z * z + I * b2;
    let mut r = [Complex64::new(0.4, 0.9), Complex64::new(0.4, 0.9).powu(2), Complex64::new(0.4, 0.9).powu(3)];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for k in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if j != k {
                    den *= r[k] - r[j];
                }
            }
            let step = p(r[k]) / den;
            r[k] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    r
}

/// `(-i) int_R db e^{i tA b} g(b)` with `g` the closed form, by residues in the upper half plane.
pub fn residue_integral_exact(ta: f64, big_b: f64) -> Complex64 {
    let b2 = big_b * big_b;
    let mut acc = Complex64::new(0.0, 0.0);
    for z in cubic_roots(big_b) {
        let b = z + I;
        if b.im > 0.0 {
            let res = (z * z + b2) / (3.0 * z * z + 2.0 * I * z);
            acc += (I * ta * b).exp() * res;
        }
    }
    // (-i) * 2 pi i * residues
    2.0 * PI * acc
}

/// Same integral by quadrature on the real line. The `1/(b+i)` tail, whose
/// transform vanishes for `tA > 0`, is subtracted so that the remainder decays like `b^-2`.
pub fn residue_integral_quadrature(ta: f64, big_b: f64) -> Result<Complex64> {
    if ta <= 0.0 {
        return Err(Error::OutOfRange("need tA > 0".into()));
    }
    let f = |b: f64| {
        let bc = Complex64::new(b, 0.0);
        let g = geometric_closed_form(bc, big_b) - (-I) / (bc + I);
        (I * ta * b).exp() * g
    };
    let l = 400.0;
    let inner = 2.0;
    let mut breaks: Vec<f64> = vec![0.0, big_b * big_b, -big_b * big_b];
    let step = PI / ta;
    let mut x = -inner;
    while x < inner {
        breaks.push(x);
        x += step;
    }
    let re = adaptive_gk_breaks(|b| f(b).re, -inner, inner, &breaks, 1e-13, 1e-11, 200_000);
    let im = adaptive_gk_breaks(|b| f(b).im, -inner, inner, &breaks, 1e-13, 1e-11, 200_000);
    let mut acc = Complex64::new(re.value, im.value);
    let rule = gauss_legendre(16);
    let panels = (((l - inner) * ta / PI).ceil() as usize).max(8);
    for (a, b) in [(-l, -inner), (inner, l)] {
        acc += Complex64::new(
            integrate_gl(&rule, a, b, panels, |x| f(x).re),
            integrate_gl(&rule, a, b, panels, |x| f(x).im),
        );
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTermReport {
    pub a: f64,
    pub big_b: f64,
    pub t: f64,
    /// Largest `|partial sum - closed form|` over the sample points.
    pub geometric_error: f64,
    pub residue_quadrature: Complex64,
    pub residue_exact: Complex64,
    pub dominant: f64,
    /// `|quadrature - 2 pi e^{-tAB^2}| / (2 pi e^{-tAB^2})`.
    pub residue_rel_error: f64,
}

/// Geometric series at `b = 2` and at random convergent `b`, plus the `b` integral.
pub fn main_term_identities(a: f64, big_b: f64, t: f64, seed: u64) -> Result<MainTermReport> {
    use rand::Rng;
    if a <= 0.0 || t <= 0.0 {
        return Err(Error::OutOfRange("need A > 0 and t > 0".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut pts = vec![Complex64::new(2.0, 0.0)];
    while pts.len() < 20 {
        let b = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-0.5..3.0));
        if geometric_ratio(b, big_b) < 0.6 {
            pts.push(b);
        }
    }
    let geometric_error = pts
        .iter()
        .map(|&b| {
            let exact = geometric_closed_form(b, big_b);
            (geometric_partial_sum(b, big_b, 40) - exact).norm() / exact.norm()
        })
        .fold(0.0, f64::max);
    let ta = t * a;
    let residue_quadrature = residue_integral_quadrature(ta, big_b)?;
    let residue_exact = residue_integral_exact(ta, big_b);
    let dominant = 2.0 * PI * (-ta * big_b * big_b).exp();
    Ok(MainTermReport {
        a,
        big_b,
        t,
        geometric_error,
        residue_quadrature,
        residue_exact,
        dominant,
        residue_rel_error: (residue_quadrature - dominant).norm() / dominant,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaReport {
    pub lambda: f64,
    pub eta: f64,
    pub r: [f64; 3],
    pub alpha: f64,
    pub beta: f64,
    pub lhs: Complex64,
    pub lhs_std_error: f64,
    /// Right side with the sign conventions matched to `Im theta >= 0`.
    pub rhs: Complex64,
    pub rhs_std_error: f64,
    /// Right side in the orientation `-2 pi i / (alpha - beta + 2 grad e . r - 2 i lambda^2 Im theta)`.
    pub rhs_printed: Complex64,
    pub gap: f64,
    pub gap_printed: f64,
    /// `lambda^{1/4}`, the scale the gap is compared against.
    pub reference: f64,
}

/// Two-resolvent integral against its level-set approximation on the `d = 3`
/// lattice, with test function `f(v) = 1 + 0.3 cos v_1`.
/// `|r|` is set just inside `lambda^{2 + kappa/4}`; `alpha - beta = lambda^2 b`.
pub fn key_lemma_check(lambda: f64, kappa: f64, eta: f64, a: f64, b: f64, samples: u64, seed: u64) -> Result<KeyLemmaReport> {
    let l2 = lambda * lambda;
    let rn = 0.9 * lambda.powf(2.0 + kappa / 4.0);
    let r = [rn * 0.48, rn * 0.6, rn * 0.64];
    let alpha = a + 0.5 * l2 * b;
    let beta = a - 0.5 * l2 * b;
    let se = SelfEnergy::born(Model::lattice3(), eta.max(1e-3))?;
    let disp = Dispersion::discrete(3);
    let f = |v: &[f64]| 1.0 + 0.3 * v[0].cos();
    let width = (l2 * se.theta_at(a).im - eta).max(eta);
    let shell = LatticeShell::multiscale(a, 0.5 * width, 6.0);
    let mut rng = seeded_rng(seed);
    let mut st = ComplexStats::default();
    let mut v = [0.0; 3];
    for _ in 0..samples {
        shell.sample(&mut rng, &mut v);
        let vm = [v[0] - r[0], v[1] - r[1], v[2] - r[2]];
        let vp = [v[0] + r[0], v[1] + r[1], v[2] + r[2]];
        let em = disp.energy(&vm);
        let ep = disp.energy(&vp);
        let d1 = alpha - em - l2 * se.theta_at(em).conj() - I * eta;
        let d2 = beta - ep - l2 * se.theta_at(ep) + I * eta;
        st.push(l2 * f(&v) / (d1 * d2) / shell.density(&v));
    }
    let im_theta = se.theta_at(a).im;
    let out = level_set_integral(&disp, a, 2, samples, seed ^ 0x5eed, |p, buf| {
        let g = disp.grad(p);
        let dot: f64 = 2.0 * g.iter().zip(&r).map(|(x, y)| x * y).sum::<f64>();
        buf[0] = l2 * f(p) / (alpha - beta + dot + 2.0 * I * l2 * im_theta);
        buf[1] = l2 * f(p) / (alpha - beta + dot - 2.0 * I * l2 * im_theta);
    })?;
    let rhs = 2.0 * PI * I * out[0].0;
    let rhs_printed = -2.0 * PI * I * out[1].0;
    let lhs = st.mean();
    Ok(KeyLemmaReport {
        lambda,
        eta,
        r,
        alpha,
        beta,
        lhs,
        lhs_std_error: st.std_error(),
        rhs,
        rhs_std_error: 2.0 * PI * out[0].1,
        rhs_printed,
        gap: (lhs - rhs).norm(),
        gap_printed: (lhs - rhs_printed).norm(),
        reference: lambda.powf(0.25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sum_at_two() {
        let b = Complex64::new(2.0, 0.0);
        let err = (geometric_partial_sum(b, 0.5, 40) - geometric_closed_form(b, 0.5)).norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn quadrature_matches_residues() {
        for (ta, bb) in [(10.0, 0.3), (100.0, 0.1)] {
            let q = residue_integral_quadrature(ta, bb).unwrap();
            let e = residue_integral_exact(ta, bb);
            assert!((q - e).norm() < 1e-4 * e.norm(), "{q} {e}");
        }
    }

    #[test]
    fn small_b_tends_to_two_pi() {
        let e = residue_integral_exact(10.0, 1e-3);
        assert!((e - Complex64::new(2.0 * PI, 0.0)).norm() < 1e-3);
    }
}

//! Nascent delta functions from the lower-order Wigner computations:
//! `t^{-1} |Q_t(A)|^2 -> 2 pi delta(A)` and `t R(t u)` with `R(u) = (e^{iu} - iu - 1) / u^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::{gauss_legendre, integrate_gl};

/// `|Q_t(a)|^2 = |(e^{ita} - 1) / (ia)|^2 = 4 sin^2(ta/2) / a^2`.
pub fn q_t_squared(t: f64, a: f64) -> f64 {
    if (t * a).abs() < 1e-8 {
        return t * t;
    }
    (2.0 * (0.5 * t * a).sin() / a).powi(2)
}

pub fn r_function(u: f64) -> Complex64 {
    if u.abs() < 1e-4 {
        // e^{iu} = 1 + iu - u^2/2 - i u^3/6 + u^4/24
        return Complex64::new(-0.5 + u * u / 24.0, -u / 6.0);
    }
    (Complex64::new(0.0, u).exp() - Complex64::new(1.0, u)) / (u * u)
}

/// `int f(x) dx` over `|x| <= half_width` in panels of one oscillation period.
fn oscillatory<F: FnMut(f64) -> f64>(half_width: f64, f: F) -> f64 {
    let rule = gauss_legendre(16);
    let panels = (half_width / PI).ceil() as usize;
    integrate_gl(&rule, -half_width, half_width, panels.max(2), f)
}

/// `int t^{-1} |Q_t(A)|^2 g(A) dA` for `g` negligible outside `|A| <= support`.
pub fn q_family_integral<G: Fn(f64) -> f64>(t: f64, g: G, support: f64) -> f64 {
    // with x = tA the kernel becomes 4 sin^2(x/2) / x^2
    oscillatory(t * support, |x| q_t_squared(1.0, x) * g(x / t))
}

/// `int t R(t u) g(u) du`.
pub fn r_family_integral<G: Fn(f64) -> f64>(t: f64, g: G, support: f64) -> Complex64 {
    let re = oscillatory(t * support, |x| r_function(x).re * g(x / t));
    let im = oscillatory(t * support, |x| r_function(x).im * g(x / t));
    Complex64::new(re, im)
}

/// `int (sin x / x)^2 dx` on `|x| <= X` plus the averaged tail `1/X`.
pub fn sinc_squared_integral(half_width: f64) -> f64 {
    let core = oscillatory(half_width, |x| if x.abs() < 1e-8 { 1.0 } else { (x.sin() / x).powi(2) });
    core + 1.0 / half_width
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaFamilyRow {
    pub t: f64,
    pub q_value: f64,
    pub q_rel_error: f64,
    pub r_value: Complex64,
    /// `|Re int t R(t u) g + pi g(0)| / (pi g(0))`.
    pub r_rel_error: f64,
    /// `Re int t R(t u) g_odd`, which must vanish.
    pub r_odd_real: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaFamilyReport {
    pub rows: Vec<DeltaFamilyRow>,
    pub sinc_normalization: f64,
    pub decreasing: bool,
}

/// Both families against the Gaussian `g(u) = exp(-u^2 / 2)` and the odd `u exp(-u^2 / 2)`
/// at `t = 10^2, 10^3, 10^4`. The real part of `t R(t u)` integrates to `-pi`.
pub fn delta_family_check() -> DeltaFamilyReport {
    let g = |u: f64| (-0.5 * u * u).exp();
    let g_odd = |u: f64| u * (-0.5 * u * u).exp();
    let support = 9.0;
    let rows: Vec<DeltaFamilyRow> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| {
            let q_value = q_family_integral(t, g, support);
            let r_value = r_family_integral(t, g, support);
            DeltaFamilyRow {
                t,
                q_value,
                q_rel_error: (q_value - 2.0 * PI).abs() / (2.0 * PI),
                r_value,
                r_rel_error: (r_value.re + PI).abs() / PI,
                r_odd_real: r_family_integral(t, g_odd, support).re,
            }
        })
        .collect();
    let decreasing = rows.windows(2).all(|w| w[1].q_rel_error < w[0].q_rel_error && w[1].r_rel_error < w[0].r_rel_error);
    DeltaFamilyReport { rows, sinc_normalization: sinc_squared_integral(2e4), decreasing }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_series_is_continuous() {
        let a = r_function(0.99e-4);
        let b = r_function(1.01e-4);
        assert!((a - b).norm() < 1e-6);
    }

    #[test]
    fn sinc_normalization() {
        assert!((sinc_squared_integral(2e4) - PI).abs() < 1e-6);
    }
}

use num_complex::Complex64;

const SPLIT: f64 = 1.0;

/// Divided difference `f[w_0, ..., w_n]` of `f(w) = exp(-i t w)`.
///
/// Uses the Newton recursion when the end points of a subset are at least
/// `1/t` apart and a shifted Taylor series in complete homogeneous symmetric
/// polynomials otherwise, so coalescing points are handled without
/// cancellation.
pub fn exp_divided_difference(t: f64, w: &[Complex64]) -> Complex64 {
    let n = w.len();
    assert!(n >= 1);
    let mut x: Vec<Complex64> = w.to_vec();
    x.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let f = |z: Complex64| (Complex64::new(0.0, -t) * z).exp();
    // prev[i] holds f[x_i .. x_{i+m-1}]
    let mut prev: Vec<Complex64> = x.iter().map(|&z| f(z)).collect();
    for m in 1..n {
        let mut cur = Vec::with_capacity(n - m);
        for i in 0..n - m {
            let j = i + m;
            let d = x[j] - x[i];
            if d.norm() * t >= SPLIT {
                cur.push((prev[i + 1] - prev[i]) / d);
            } else {
                cur.push(taylor(t, &x[i..=j]));
            }
        }
        prev = cur;
    }
    prev[0]
}

fn taylor(t: f64, x: &[Complex64]) -> Complex64 {
    let m = x.len() - 1;
    let c = x.iter().sum::<Complex64>() / x.len() as f64;
    let y: Vec<Complex64> = x.iter().map(|&z| z - c).collect();
    let rho = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r_max = 30 + (4.0 * t * rho) as usize;
    // h[r] = complete homogeneous symmetric polynomial of degree r in y
    let mut h = vec![Complex64::new(0.0, 0.0); r_max + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for (k, &yk) in y.iter().enumerate() {
        if k == 0 {
            for r in 1..=r_max {
                h[r] = h[r - 1] * yk;
            }
        } else {
            for r in 1..=r_max {
                let prev = h[r - 1];
                h[r] += yk * prev;
            }
        }
    }
    let mit = Complex64::new(0.0, -t);
    // coefficient (-it)^(m+r)/(m+r)!
    let mut coef = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        coef = coef * mit / k as f64;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    // |h_r| <= binom(r+m, m) rho^r bounds the tail independently of cancellations
    let mut binom_rho = 1.0;
    for (r, hr) in h.iter().enumerate() {
        sum += coef * hr;
        if r > 2 && coef.norm() * binom_rho <= 1e-18 * sum.norm() {
            break;
        }
        coef = coef * mit / (m + r + 1) as f64;
        binom_rho *= rho * (r + m + 1) as f64 / (r + 1) as f64;
    }
    (mit * c).exp() * sum
}

/// Time-simplex integral `int_{s_0+...+s_n=t, s_j>=0} prod_j exp(-i s_j w_j) ds`.
pub fn simplex_integral(t: f64, w: &[Complex64]) -> Complex64 {
    let n = w.len() - 1;
    let phase = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    phase * exp_divided_difference(t, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_step_closed_form() {
        let t = 3.0;
        for &(a, b) in &[(0.3, 1.7), (1.0, 1.0 + 1e-9), (2.0, 2.0)] {
            let w = [c(a, -0.05), c(b, -0.02)];
            let got = simplex_integral(t, &w);
            // numerical quadrature of int_0^t e^{-i s w0 - i (t-s) w1} ds
            let rule = super::super::gauss_legendre(40);
            let mut re = 0.0;
            let mut im = 0.0;
            for (s, wt) in rule.mapped(0.0, t) {
                let z = (c(0.0, -s) * w[0] + c(0.0, -(t - s)) * w[1]).exp();
                re += wt * z.re;
                im += wt * z.im;
            }
            assert!((got - c(re, im)).norm() < 1e-12, "{got} vs {re} {im}");
        }
    }

    #[test]
    fn coincident_points_match_derivative() {
        // f[x, x, x] = f''(x) / 2
        let t = 2.5;
        let x = c(0.7, -0.1);
        let got = exp_divided_difference(t, &[x, x, x]);
        let want = c(0.0, -t) * c(0.0, -t) * (c(0.0, -t) * x).exp() / 2.0;
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn recursion_and_series_agree_near_threshold() {
        let t = 10.0;
        let a = [c(0.1, -0.01), c(0.1 + 0.0999, -0.02), c(0.35, 0.0), c(1.2, -0.03)];
        let b = [c(0.1, -0.01), c(0.1 + 0.1001, -0.02), c(0.35, 0.0), c(1.2, -0.03)];
        let da = exp_divided_difference(t, &a);
        let db = exp_divided_difference(t, &b);
        assert!((da - db).norm() < 1e-3 * da.norm().max(1e-3));
    }
}

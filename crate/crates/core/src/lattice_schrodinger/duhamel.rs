//! Terms of the finite Duhamel expansion
//! `psi_t = sum_{n < N} psi^(n)(t) + Psi_N(t)` by nested Gauss-Legendre quadrature.
//!
//! `psi^(n)(s) = -i lambda int_0^s e^{-i(s-r)H_0} V psi^(n-1)(r) dr`, so each
//! level is one quadrature over `[0, s]` of the level below.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{FreePropagator, Hamiltonian, SpectralPropagator};
use super::lattice::WaveFunction;
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, GaussLegendre};

/// Largest expansion order accepted.
pub const MAX_DUHAMEL_ORDER: usize = 5;

pub(crate) struct Expander<'a> {
    h: &'a Hamiltonian,
    free: FreePropagator,
    psi0: &'a [Complex64],
    rule: GaussLegendre,
    /// `cumulative[i][j] = int_{-1}^{x_i} l_j`, Lagrange basis on the rule's nodes.
    cumulative: Vec<Vec<f64>>,
    /// Panels per unit length, from the spectral width.
    density: f64,
}

fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for k in 1..n {
        p.push(((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64);
    }
    p
}

fn cumulative_matrix(rule: &GaussLegendre) -> Vec<Vec<f64>> {
    let n = rule.nodes.len();
    let at_nodes: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| legendre_values(n + 1, x)).collect();
    (0..n)
        .map(|i| {
            let pi = &at_nodes[i];
            (0..n)
                .map(|j| {
                    let pj = &at_nodes[j];
                    // l_j = w_j sum_m (2m+1)/2 P_m(x_j) P_m, integrated term by term
                    let mut s = 0.5 * (rule.nodes[i] + 1.0);
                    for m in 1..n {
                        s += 0.5 * pj[m] * (pi[m + 1] - pi[m - 1]);
                    }
                    rule.weights[j] * s
                })
                .collect()
        })
        .collect()
}

impl<'a> Expander<'a> {
    pub(crate) fn new(h: &'a Hamiltonian, psi0: &'a [Complex64], order: usize) -> Self {
        let (lo, hi) = h.spectral_bounds();
        let rule = gauss_legendre(order);
        Self { h, free: FreePropagator::new(h.lattice), psi0, cumulative: cumulative_matrix(&rule), rule, density: (hi - lo) / 8.0 }
    }

    fn panels(&self, len: f64) -> usize {
        ((len * self.density).ceil() as usize).max(1)
    }

    /// Nodes and weights of the composite rule on `[0, s]`.
    pub(crate) fn nodes(&self, s: f64) -> Vec<(f64, f64)> {
        let p = self.panels(s);
        let h = s / p as f64;
        (0..p).flat_map(|k| self.rule.mapped(k as f64 * h, (k + 1) as f64 * h).collect::<Vec<_>>()).collect()
    }

    /// `-i lambda V phi`.
    pub(crate) fn kick(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let c = Complex64::new(0.0, -self.h.lambda);
        phi.iter().zip(&self.h.potential.values).map(|(z, v)| z * c * v).collect()
    }

    pub(crate) fn term(&self, n: usize, s: f64) -> Vec<Complex64> {
        if n == 0 {
            return self.free.evolve(self.psi0, s);
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.psi0.len()];
        for (r, w) in self.nodes(s) {
            let inner = self.kick(&self.term(n - 1, r));
            for (a, b) in acc.iter_mut().zip(self.free.evolve(&inner, s - r)) {
                *a += b * w;
            }
        }
        acc
    }

    /// `psi^(0)(t) .. psi^(n_max)(t)` in the interaction picture: with
    /// `u_n(s) = e^{isH_0} psi^(n)(s)`, `u_n(s) = int_0^s e^{irH_0} (-i lambda V) e^{-irH_0} u_{n-1}(r) dr`
    /// is integrated cumulatively on every panel by collocation, so each order
    /// costs one pass over the nodes instead of a nested quadrature.
    pub(crate) fn terms_at(&self, n_max: usize, t: f64) -> Vec<Vec<Complex64>> {
        let p = self.panels(t);
        let h = t / p as f64;
        let q = self.rule.nodes.len();
        let times: Vec<f64> = (0..p).flat_map(|k| self.rule.nodes.iter().map(move |x| (k as f64 + 0.5 * (x + 1.0)) * h)).collect();
        let zero = vec![Complex64::new(0.0, 0.0); self.psi0.len()];
        let mut u: Vec<Vec<Complex64>> = vec![self.psi0.to_vec(); times.len()];
        let mut out = vec![self.free.evolve(self.psi0, t)];
        for _ in 0..n_max {
            let g: Vec<Vec<Complex64>> =
                times.iter().zip(&u).map(|(&r, ur)| self.free.evolve(&self.kick(&self.free.evolve(ur, r)), -r)).collect();
            let mut next = Vec::with_capacity(times.len());
            let mut base = zero.clone();
            for k in 0..p {
                let panel = &g[k * q..(k + 1) * q];
                for i in 0..q {
                    let mut v = base.clone();
                    for (j, gj) in panel.iter().enumerate() {
                        let c = 0.5 * h * self.cumulative[i][j];
                        v.iter_mut().zip(gj).for_each(|(a, b)| *a += b * c);
                    }
                    next.push(v);
                }
                for (j, gj) in panel.iter().enumerate() {
                    let c = 0.5 * h * self.rule.weights[j];
                    base.iter_mut().zip(gj).for_each(|(a, b)| *a += b * c);
                }
            }
            out.push(self.free.evolve(&base, t));
            u = next;
        }
        out
    }

    /// `Psi_N(t) = int_0^t e^{-i(t-s)H} (-i lambda V) psi^(N-1)(s) ds`.
    fn remainder(&self, full: &SpectralPropagator, n: usize, t: f64) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.psi0.len()];
        for (s, w) in self.nodes(t) {
            let inner = self.kick(&self.term(n - 1, s));
            for (a, b) in acc.iter_mut().zip(full.evolve(&inner, t - s)) {
                *a += b * w;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelTerms {
    pub t: f64,
    pub lambda: f64,
    /// `psi^(0) .. psi^(N-1)`.
    pub terms: Vec<WaveFunction>,
    pub remainder: WaveFunction,
    pub exact: WaveFunction,
    /// `|psi_t - sum psi^(n) - Psi_N|`.
    pub residual: f64,
    /// Change of the expansion when the per-level order is halved.
    pub quadrature_estimate: f64,
}

impl DuhamelTerms {
    /// `Phi_N = sum_{n < N} psi^(n)`.
    pub fn expanded(&self) -> WaveFunction {
        let mut amp = vec![Complex64::new(0.0, 0.0); self.exact.amp.len()];
        for t in &self.terms {
            amp.iter_mut().zip(&t.amp).for_each(|(a, b)| *a += b);
        }
        WaveFunction { lattice: self.exact.lattice, amp }
    }
}

/// Expansion terms of `e^{-itH} psi_0` up to order `n_terms`, with the exact
/// evolution for comparison.
pub fn duhamel_terms(h: &Hamiltonian, psi0: &WaveFunction, t: f64, n_terms: usize) -> Result<DuhamelTerms> {
    if n_terms == 0 || n_terms > MAX_DUHAMEL_ORDER {
        return Err(Error::OutOfRange(format!("expansion order {n_terms}, allowed 1..={MAX_DUHAMEL_ORDER}")));
    }
    if !(t >= 0.0) {
        return Err(Error::OutOfRange(format!("t = {t}")));
    }
    let full = SpectralPropagator::new(h)?;
    let run = |order: usize| -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
        let ex = Expander::new(h, &psi0.amp, order);
        let terms: Vec<Vec<Complex64>> = (0..n_terms).map(|n| ex.term(n, t)).collect();
        let rem = ex.remainder(&full, n_terms, t);
        (terms, rem)
    };
    let (terms, rem) = run(16);
    let (coarse_terms, coarse_rem) = run(8);
    let diff = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let quadrature_estimate = terms
        .iter()
        .zip(&coarse_terms)
        .map(|(a, b)| diff(a, b))
        .chain(std::iter::once(diff(&rem, &coarse_rem)))
        .fold(0.0, f64::max);
    if quadrature_estimate > 1e-6 {
        return Err(Error::Convergence(format!("simplex quadrature changes by {quadrature_estimate:.2e} under order halving")));
    }
    let exact = full.evolve(&psi0.amp, t);
    let mut sum = rem.clone();
    for term in &terms {
        sum.iter_mut().zip(term).for_each(|(a, b)| *a += b);
    }
    let residual = diff(&exact, &sum);
    let wrap = |amp: Vec<Complex64>| WaveFunction { lattice: h.lattice, amp };
    Ok(DuhamelTerms {
        t,
        lambda: h.lambda,
        terms: terms.into_iter().map(wrap).collect(),
        remainder: wrap(rem),
        exact: wrap(exact),
        residual,
        quadrature_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitarityBoundCheck {
    /// `|<J, W_psi> - <J, W_Phi>|` divided by `int dxi sup_v |J^|`.
    pub lhs: f64,
    /// `(1 + |Phi_N|) |Psi_N|`.
    pub middle: f64,
    /// `(1 + |Phi_N|) t sup_s |lambda V psi^(N-1)(s)|` over a time grid.
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of the unitarity bound for one potential realization and a test observable.
pub fn unitarity_bound_check<J: Fn(&[f64], &[f64]) -> Complex64>(
    h: &Hamiltonian,
    psi0: &WaveFunction,
    t: f64,
    n_terms: usize,
    jhat: J,
) -> Result<UnitarityBoundCheck> {
    let d = duhamel_terms(h, psi0, t, n_terms)?;
    let phi = d.expanded();
    let (gap, weight) = super::wigner::pairing_difference(&d.exact, &phi, &jhat);
    let ex = Expander::new(h, &psi0.amp, 16);
    let mut sup: f64 = 0.0;
    for k in 0..=64 {
        let s = t * k as f64 / 64.0;
        let kicked = ex.kick(&ex.term(n_terms - 1, s));
        sup = sup.max(kicked.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    let a = 1.0 + phi.norm();
    let lhs = gap / weight;
    let rhs = a * t * sup;
    Ok(UnitarityBoundCheck { lhs, middle: a * d.remainder.norm(), rhs, holds: lhs <= rhs * (1.0 + 1e-9) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_schrodinger::{build_hamiltonian, LatticeBox, PotentialLaw};

    #[test]
    fn one_step_identity() {
        let b = LatticeBox::new(1, 8).unwrap();
        let h = build_hamiltonian(b, 0.3, PotentialLaw::Bernoulli, 1).unwrap();
        let d = duhamel_terms(&h, &WaveFunction::delta(b, 0), 1.5, 1).unwrap();
        assert!(d.residual < 1e-10, "{}", d.residual);
    }

    #[test]
    fn three_term_residual() {
        let b = LatticeBox::new(1, 8).unwrap();
        let h = build_hamiltonian(b, 0.2, PotentialLaw::Bernoulli, 2).unwrap();
        let d = duhamel_terms(&h, &WaveFunction::delta(b, 0), 2.0, 3).unwrap();
        assert!(d.residual < 1e-8, "{}", d.residual);
        assert!(d.quadrature_estimate < 1e-8);
    }

    #[test]
    fn terms_scale_as_powers_of_lambda() {
        let b = LatticeBox::new(1, 8).unwrap();
        let psi = WaveFunction::delta(b, 0);
        let mut h = build_hamiltonian(b, 0.4, PotentialLaw::Bernoulli, 3).unwrap();
        let big = duhamel_terms(&h, &psi, 1.0, 3).unwrap();
        h.lambda = 0.2;
        let small = duhamel_terms(&h, &psi, 1.0, 3).unwrap();
        for n in 0..3 {
            let ratio = small.terms[n].norm() / big.terms[n].norm();
            assert!((ratio - 0.5f64.powi(n as i32)).abs() < 1e-9, "n = {n}: {ratio}");
        }
    }

    #[test]
    fn collocation_matches_nested_quadrature() {
        let b = LatticeBox::new(1, 16).unwrap();
        let h = build_hamiltonian(b, 0.3, PotentialLaw::Bernoulli, 5).unwrap();
        let psi = WaveFunction::delta(b, 0);
        let ex = Expander::new(&h, &psi.amp, 16);
        let fast = ex.terms_at(3, 5.0);
        for n in 0..=3 {
            let slow = ex.term(n, 5.0);
            let d: f64 = fast[n].iter().zip(&slow).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(d < 1e-10, "n = {n}: {d}");
        }
    }

    #[test]
    fn order_limit() {
        let b = LatticeBox::new(1, 8).unwrap();
        let h = build_hamiltonian(b, 0.2, PotentialLaw::Bernoulli, 2).unwrap();
        assert!(duhamel_terms(&h, &WaveFunction::delta(b, 0), 1.0, 6).is_err());
    }
}

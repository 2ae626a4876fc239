//! Power counting for momentum integrals over general graphs with Kirchhoff
//! constraints, and an exact summation oracle on the discrete torus.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng64;

/// Oriented multigraph; edge `(tail, head)` with vertices in `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GeneralGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::OutOfRange("graph needs at least one vertex".into()));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= vertices || b >= vertices) {
            return Err(Error::OutOfRange(format!("edge ({a}, {b}) outside 0..{vertices}")));
        }
        let g = Self { vertices, edges };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Random connected graph: a random spanning tree plus `extra` edges.
    pub fn random_connected(rng: &mut Rng64, vertices: usize, extra: usize) -> Self {
        let mut edges = vec![];
        for v in 1..vertices {
            let u = rng.random_range(0..v);
            edges.push(if rng.random::<bool>() { (u, v) } else { (v, u) });
        }
        while edges.len() < vertices - 1 + extra && vertices > 1 {
            let a = rng.random_range(0..vertices);
            let b = rng.random_range(0..vertices);
            if a != b {
                edges.push((a, b));
            }
        }
        Self { vertices, edges }
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_tree().1.iter().all(|&s| s)
    }

    /// Parent edge of each vertex in a BFS tree rooted at 0, and reachability.
    fn bfs_tree(&self) -> (Vec<Option<usize>>, Vec<bool>) {
        let mut parent = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for (i, &(a, b)) in self.edges.iter().enumerate() {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some(i);
                    queue.push_back(other);
                }
            }
        }
        (parent, seen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCount {
    pub bound: f64,
    pub tree_edges: Vec<usize>,
    pub loop_edges: Vec<usize>,
    /// `sigma[i][a]`: coefficient of loop momentum `loop_edges[a]` in tree momentum `tree_edges[i]`.
    pub sigma: Vec<Vec<i8>>,
}

/// `||R||_1^{K-N+1} ||R||_inf^{N-1}` with the tree/loop decomposition behind it.
pub fn power_count(g: &GeneralGraph, r1: f64, rinf: f64) -> Result<PowerCount> {
    let (parent, seen) = g.bfs_tree();
    if !seen.iter().all(|&s| s) {
        return Err(Error::Disconnected);
    }
    let tree_edges: Vec<usize> = {
        let mut t: Vec<usize> = parent.iter().flatten().copied().collect();
        t.sort_unstable();
        t
    };
    let loop_edges: Vec<usize> = (0..g.edges.len()).filter(|e| !tree_edges.contains(e)).collect();
    let depth = {
        let mut d = vec![0usize; g.vertices];
        // BFS parents always precede children in discovery, so iterate until stable
        for _ in 0..g.vertices {
            for v in 0..g.vertices {
                if let Some(e) = parent[v] {
                    let (a, b) = g.edges[e];
                    let u = if a == v { b } else { a };
                    d[v] = d[u] + 1;
                }
            }
        }
        d
    };
    let mut sigma = vec![vec![0i8; loop_edges.len()]; tree_edges.len()];
    for (ai, &a) in loop_edges.iter().enumerate() {
        // the loop runs along `a` from tail to head, then back through the tree
        let (ta, ha) = g.edges[a];
        let (mut x, mut y) = (ha, ta);
        let mut from_x = vec![];
        let mut from_y = vec![];
        while x != y {
            if depth[x] >= depth[y] {
                let e = parent[x].unwrap();
                let (s, t) = g.edges[e];
                let next = if s == x { t } else { s };
                from_x.push((e, if s == x { 1 } else { -1 }));
                x = next;
            } else {
                let e = parent[y].unwrap();
                let (s, t) = g.edges[e];
                let next = if s == y { t } else { s };
                // traversed from `next` towards `y`
                from_y.push((e, if t == y { 1 } else { -1 }));
                y = next;
            }
        }
        for (e, s) in from_x.into_iter().chain(from_y) {
            let i = tree_edges.iter().position(|&t| t == e).unwrap();
            sigma[i][ai] = s;
        }
    }
    let k = g.edges.len() as i32;
    let n = g.vertices as i32;
    Ok(PowerCount { bound: r1.powi(k - n + 1) * rinf.powi(n - 1), tree_edges, loop_edges, sigma })
}

/// Propagator profile on the torus `Z_m^d`, stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusProfile {
    pub m: usize,
    pub d: usize,
    pub values: Vec<f64>,
}

impl TorusProfile {
    pub fn from_fn(m: usize, d: usize, f: impl Fn(&[usize]) -> f64) -> Self {
        let size = m.pow(d as u32);
        let mut idx = vec![0; d];
        let values = (0..size)
            .map(|mut k| {
                for c in (0..d).rev() {
                    idx[c] = k % m;
                    k /= m;
                }
                f(&idx)
            })
            .collect();
        Self { m, d, values }
    }

    /// `1 / (1 + sum_j (2 - 2 cos(2 pi k_j / m)))`.
    pub fn lattice_lorentzian(m: usize, d: usize) -> Self {
        Self::from_fn(m, d, |k| {
            1.0 / (1.0 + k.iter().map(|&x| 2.0 - 2.0 * (2.0 * PI * x as f64 / m as f64).cos()).sum::<f64>())
        })
    }

    pub fn norm_1(&self) -> f64 {
        self.values.iter().map(|x| x.abs()).sum::<f64>() / self.values.len() as f64
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    fn coords(&self, mut k: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        for x in c.iter_mut().rev() {
            *x = k % self.m;
            k /= self.m;
        }
        c
    }

    /// Inverse transform `(1/m^d) sum_p R(p) exp(2 pi i p.x / m)` for every `x`.
    fn position_space(&self) -> Vec<Complex64> {
        let size = self.values.len();
        let coords: Vec<Vec<usize>> = (0..size).map(|k| self.coords(k)).collect();
        (0..size)
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, &r) in self.values.iter().enumerate() {
                    let dot: usize = coords[p].iter().zip(&coords[x]).map(|(a, b)| a * b).sum();
                    acc += r * Complex64::from_polar(1.0, 2.0 * PI * (dot % self.m) as f64 / self.m as f64);
                }
                acc / size as f64
            })
            .collect()
    }
}

/// `Omega_w` on `Z_m^d` with normalized measure, by exact summation over
/// vertex positions (the Kirchhoff deltas written as Fourier sums), `x_w = 0`.
pub fn brute_force_omega(g: &GeneralGraph, r: &TorusProfile, w: usize) -> Result<f64> {
    if w >= g.vertices {
        return Err(Error::OutOfRange(format!("vertex {w} outside 0..{}", g.vertices)));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let size = r.values.len();
    let check = r.position_space();
    let coords: Vec<Vec<usize>> = (0..size).map(|k| r.coords(k)).collect();
    let diff_index = |h: usize, t: usize| -> usize {
        coords[h].iter().zip(&coords[t]).fold(0, |acc, (a, b)| acc * r.m + (a + r.m - b) % r.m)
    };
    // table[h * size + t] = R_check(x_h - x_t)
    let table: Vec<Complex64> = (0..size * size).map(|i| check[diff_index(i / size, i % size)]).collect();
    // assignment order: w first (fixed at the origin), then the others
    let order: Vec<usize> = std::iter::once(w).chain((0..g.vertices).filter(|&v| v != w)).collect();
    let pos_of: Vec<usize> = {
        let mut p = vec![0; g.vertices];
        for (i, &v) in order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    // edges closed when their later endpoint is assigned
    let mut closing: Vec<Vec<(usize, usize)>> = vec![vec![]; g.vertices];
    for &(t, h) in &g.edges {
        let level = pos_of[t].max(pos_of[h]);
        closing[level].push((pos_of[h], pos_of[t]));
    }
    let mut x = vec![0usize; g.vertices];
    let start = closing[0].iter().fold(Complex64::new(1.0, 0.0), |acc, _| acc * table[0]);
    let total = descend(1, start, &mut x, &closing, &table, size);
    Ok(total.re)
}

fn descend(
    level: usize,
    acc: Complex64,
    x: &mut [usize],
    closing: &[Vec<(usize, usize)>],
    table: &[Complex64],
    size: usize,
) -> Complex64 {
    if level == x.len() {
        return acc;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for pos in 0..size {
        x[level] = pos;
        let mut a = acc;
        for &(h, t) in &closing[level] {
            a *= table[x[h] * size + x[t]];
        }
        sum += descend(level + 1, a, x, closing, table, size);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;

    #[test]
    fn sigma_satisfies_kirchhoff() {
        let mut rng = seeded_rng(5);
        for _ in 0..20 {
            let g = GeneralGraph::random_connected(&mut rng, 6, 4);
            let pc = power_count(&g, 1.0, 1.0).unwrap();
            let loops: Vec<f64> = pc.loop_edges.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut p = vec![0.0; g.edges.len()];
            for (i, &a) in pc.loop_edges.iter().enumerate() {
                p[a] = loops[i];
            }
            for (i, &e) in pc.tree_edges.iter().enumerate() {
                p[e] = pc.sigma[i].iter().zip(&loops).map(|(&s, l)| s as f64 * l).sum();
            }
            for v in 0..g.vertices {
                let net: f64 = g
                    .edges
                    .iter()
                    .zip(&p)
                    .map(|(&(t, h), x)| if h == v { *x } else { 0.0 } - if t == v { *x } else { 0.0 })
                    .sum();
                assert!(net.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_parallel_edges() {
        let g = GeneralGraph::new(2, vec![(0, 1), (0, 1)]).unwrap();
        let r = TorusProfile::lattice_lorentzian(8, 1);
        let omega = brute_force_omega(&g, &r, 0).unwrap();
        // one loop momentum p: both edges carry p
        let direct: f64 = r.values.iter().map(|x| x * x).sum::<f64>() / 8.0;
        assert!((omega - direct).abs() < 1e-12);
        let pc = power_count(&g, r.norm_1(), r.norm_inf()).unwrap();
        assert!(omega <= pc.bound);
        assert!((pc.bound - r.norm_1() * r.norm_inf()).abs() < 1e-15);
    }

    #[test]
    fn tree_graph_fixes_momenta() {
        let g = GeneralGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let r = TorusProfile::lattice_lorentzian(8, 1);
        let omega = brute_force_omega(&g, &r, 1).unwrap();
        assert!((omega - r.values[0] * r.values[0]).abs() < 1e-12);
    }

    #[test]
    fn disconnected_rejected() {
        assert!(matches!(GeneralGraph::new(3, vec![(0, 1)]), Err(Error::Disconnected)));
    }
}

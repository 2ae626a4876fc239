use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_CONNECTED_ORDER: usize = 8;

/// All set partitions of `{0..m-1}` as lists of blocks (restricted growth strings).
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![];
    let mut rgs = vec![0usize; m];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let m = rgs.len();
        if i == m {
            let nb = rgs.iter().copied().max().map_or(0, |x| x + 1);
            let mut blocks = vec![vec![]; nb];
            for (k, &b) in rgs.iter().enumerate() {
                blocks[b].push(k);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max {
            rgs[i] = b;
            rec(i + 1, max.max(b + 1), rgs, out);
        }
    }
    if m == 0 {
        return vec![vec![]];
    }
    rec(1, 1, &mut rgs, &mut out);
    out
}

/// Coefficients `c(1..=m)` of the expansion of the all-distinct label sum
/// into momentum delta functions over set partitions.
///
/// Summing over all label tuples constant on the blocks of a partition `Q`
/// gives the product of block deltas, and every tuple has exactly one
/// equality pattern, so `sum_{P >= Q} mu(Q, P) = [Q = top]`. The top element
/// of the partition lattice of `k` therefore satisfies
/// `c(k) = -sum_{Q != top} prod_{B in Q} c(|B|)`.
pub fn connected_graph_coefficients(m: usize) -> Result<Vec<i64>> {
    if m == 0 || m > MAX_CONNECTED_ORDER {
        return Err(Error::OutOfRange(format!("order {m} not in 1..={MAX_CONNECTED_ORDER}")));
    }
    let mut c = vec![0i64; m + 1];
    c[1] = 1;
    for k in 2..=m {
        let s: i64 = set_partitions(k)
            .into_iter()
            .filter(|q| q.len() > 1)
            .map(|q| q.iter().map(|b| c[b.len()]).product::<i64>())
            .sum();
        c[k] = -s;
    }
    Ok(c[1..].to_vec())
}

/// Maximum over all momentum tuples in `Z_a^m` of the difference between the
/// brute-force all-distinct label sum and the partition expansion.
pub fn connected_graph_identity_residual(m: usize, alphabet: usize) -> Result<f64> {
    let c = connected_graph_coefficients(m)?;
    let parts = set_partitions(m);
    let a = alphabet;
    let phase: Vec<Complex64> = (0..a).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / a as f64)).collect();
    let tuples = |len: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..a).map(move |x| {
                        let mut t2 = t.clone();
                        t2.push(x);
                        t2
                    })
                })
                .collect();
        }
        out
    };
    let labels: Vec<Vec<usize>> = tuples(m)
        .into_iter()
        .filter(|t| {
            let mut s = t.clone();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        })
        .collect();
    let mut worst: f64 = 0.0;
    for q in tuples(m) {
        let lhs: Complex64 = labels
            .iter()
            .map(|al| phase[al.iter().zip(&q).map(|(x, y)| x * y).sum::<usize>() % a])
            .sum();
        let rhs: f64 = parts
            .iter()
            .map(|p| {
                p.iter()
                    .map(|b| {
                        let qs: usize = b.iter().map(|&l| q[l]).sum();
                        let delta = if qs % a == 0 { a as f64 } else { 0.0 };
                        c[b.len() - 1] as f64 * delta
                    })
                    .product::<f64>()
            })
            .sum();
        worst = worst.max((lhs - Complex64::new(rhs, 0.0)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (m, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(m).len(), b);
        }
    }

    #[test]
    fn first_coefficients() {
        assert_eq!(connected_graph_coefficients(2).unwrap(), vec![1, -1]);
        assert!(connected_graph_coefficients(9).is_err());
    }

    #[test]
    fn factorial_closed_form() {
        let c = connected_graph_coefficients(8).unwrap();
        let mut fact = 1i64;
        for k in 1..=8 {
            if k > 1 {
                fact *= k as i64 - 1;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(c[k - 1], sign * fact, "k={k}");
        }
    }
}

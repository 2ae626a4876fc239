use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::MomentumMatrix;
use crate::numerics::seeded_rng;

/// Matrices up to this size have every minor enumerated.
pub const EXHAUSTIVE_MAX: usize = 7;
const RANDOM_MINORS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularReport {
    pub unimodular: bool,
    pub exhaustive: bool,
    pub minors_checked: u64,
    /// First offending minor as (rows, columns, determinant), 1-based.
    pub witness: Option<(Vec<usize>, Vec<usize>, i64)>,
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn integer_determinant(a: &[Vec<i64>]) -> i64 {
    let k = a.len();
    if k == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let mut sign = 1;
    let mut prev = 1i64;
    for c in 0..k - 1 {
        if m[c][c] == 0 {
            match (c + 1..k).find(|&r| m[r][c] != 0) {
                Some(r) => {
                    m.swap(c, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in c + 1..k {
            for j in c + 1..k {
                m[i][j] = (m[i][j] * m[c][c] - m[i][c] * m[c][j]) / prev;
            }
        }
        prev = m[c][c];
    }
    sign * m[k - 1][k - 1]
}

fn minor(m: &MomentumMatrix, rows: &[usize], cols: &[usize]) -> i64 {
    let a: Vec<Vec<i64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| m.get(i, j) as i64).collect())
        .collect();
    integer_determinant(&a)
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in start..=k {
            if k - x + 1 < size - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, k, size, cur, out);
            cur.pop();
        }
    }
    rec(1, k, size, &mut cur, &mut out);
    out
}

/// Every square minor of size `<= max_minor` enumerated.
pub fn all_minors_unimodular(m: &MomentumMatrix, max_minor: usize) -> UnimodularReport {
    let k = m.size();
    let mut checked = 0;
    for s in 1..=max_minor.min(k) {
        let sets = subsets(k, s);
        for r in &sets {
            for c in &sets {
                checked += 1;
                let d = minor(m, r, c);
                if d.abs() > 1 {
                    return UnimodularReport {
                        unimodular: false,
                        exhaustive: true,
                        minors_checked: checked,
                        witness: Some((r.clone(), c.clone(), d)),
                    };
                }
            }
        }
    }
    UnimodularReport { unimodular: true, exhaustive: true, minors_checked: checked, witness: None }
}

/// Total unimodularity up to minors of size `max_minor`: exhaustive when the
/// matrix has at most [`EXHAUSTIVE_MAX`] rows, otherwise 10^4 random minors
/// plus all 1x1 entries.
pub fn check_unimodular(m: &MomentumMatrix, max_minor: usize, seed: u64) -> UnimodularReport {
    let k = m.size();
    if k <= EXHAUSTIVE_MAX {
        return all_minors_unimodular(m, max_minor);
    }
    let first = all_minors_unimodular(m, 1);
    if !first.unimodular {
        return UnimodularReport { exhaustive: false, ..first };
    }
    let mut rng = seeded_rng(seed);
    let mut checked = first.minors_checked;
    let top = max_minor.min(k).max(1);
    for _ in 0..RANDOM_MINORS {
        let s = rng.random_range(1..=top);
        let mut r: Vec<usize> = sample(&mut rng, k, s).into_iter().map(|x| x + 1).collect();
        let mut c: Vec<usize> = sample(&mut rng, k, s).into_iter().map(|x| x + 1).collect();
        r.sort_unstable();
        c.sort_unstable();
        checked += 1;
        let d = minor(m, &r, &c);
        if d.abs() > 1 {
            return UnimodularReport { unimodular: false, exhaustive: false, minors_checked: checked, witness: Some((r, c, d)) };
        }
    }
    UnimodularReport { unimodular: true, exhaustive: false, minors_checked: checked, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_hand_values() {
        assert_eq!(integer_determinant(&[vec![2, 1], vec![1, 3]]), 5);
        assert_eq!(integer_determinant(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(integer_determinant(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
        assert_eq!(integer_determinant(&[vec![1, 1], vec![1, 1]]), 0);
    }

    #[test]
    fn injected_two_is_caught() {
        let mut m = MomentumMatrix::identity(3);
        assert!(check_unimodular(&m, 4, 1).unimodular);
        m.set(2, 3, 2);
        let r = check_unimodular(&m, 4, 1);
        assert!(!r.unimodular);
        assert_eq!(r.witness.unwrap().2, 2);
    }

    #[test]
    fn determinant_two_minor_detected() {
        // [[1,1],[-1,1]] has determinant 2 although all entries are +-1
        let m = MomentumMatrix::from_rows(&[vec![1, 1], vec![-1, 1]]).unwrap();
        assert!(!all_minors_unimodular(&m, 2).unimodular);
    }
}

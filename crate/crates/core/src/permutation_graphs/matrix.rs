use serde::{Deserialize, Serialize};

use super::permutation::Permutation;
use crate::error::{Error, Result};

/// `(n+1) x (n+1)` matrix with entries in `{-1, 0, 1}` mapping loop momenta
/// `p` to tree momenta `p' = M p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumMatrix {
    pub n: usize,
    /// Row-major entries, `entries[(i-1)*(n+1) + (j-1)] = M_ij`.
    pub entries: Vec<i8>,
}

/// Consecutive block of equal nonzero entries in one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub column: usize,
    pub top: usize,
    pub bottom: usize,
    pub sign: i8,
}

impl MomentumMatrix {
    pub fn identity(n: usize) -> Self {
        let k = n + 1;
        let mut entries = vec![0; k * k];
        for i in 0..k {
            entries[i * k + i] = 1;
        }
        Self { n, entries }
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let mut entries = Vec::with_capacity(k * k);
        for r in rows {
            if r.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Ok(Self { n: k - 1, entries })
    }

    pub fn size(&self) -> usize {
        self.n + 1
    }

    /// `M_ij` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[(i - 1) * self.size() + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        let k = self.size();
        self.entries[(i - 1) * k + (j - 1)] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        self.entries.chunks(self.size()).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &MomentumMatrix) -> Vec<Vec<i64>> {
        let k = self.size();
        let mut out = vec![vec![0i64; k]; k];
        for i in 0..k {
            for l in 0..k {
                let a = self.entries[i * k + l] as i64;
                if a != 0 {
                    for j in 0..k {
                        out[i][j] += a * other.entries[l * k + j] as i64;
                    }
                }
            }
        }
        out
    }

    pub fn is_inverse_of(&self, other: &MomentumMatrix) -> bool {
        if self.n != other.n {
            return false;
        }
        self.mul(other)
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| v == (i == j) as i64))
    }

    /// Nonzero blocks of column `j`.
    pub fn towers(&self) -> Vec<Tower> {
        let k = self.size();
        let mut out = vec![];
        for j in 1..=k {
            let mut i = 1;
            while i <= k {
                let s = self.get(i, j);
                if s == 0 {
                    i += 1;
                    continue;
                }
                let top = i;
                while i <= k && self.get(i, j) == s {
                    i += 1;
                }
                out.push(Tower { column: j, top, bottom: i - 1, sign: s });
            }
        }
        out
    }

    /// `p' = M p` for momenta of any common dimension.
    pub fn apply(&self, p: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = self.size();
        if p.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: p.len() });
        }
        let d = p[0].len();
        if let Some(bad) = p.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        let mut out = vec![vec![0.0; d]; k];
        for i in 0..k {
            for j in 0..k {
                let m = self.entries[i * k + j];
                if m != 0 {
                    for c in 0..d {
                        out[i][c] += m as f64 * p[j][c];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Fixed-dimension variant used in inner loops; `out` must have length `n+1`.
    pub fn apply_into<const D: usize>(&self, p: &[[f64; D]], out: &mut [[f64; D]]) {
        let k = self.size();
        for i in 0..k {
            let mut acc = [0.0; D];
            for j in 0..k {
                let m = self.entries[i * k + j];
                if m != 0 {
                    for c in 0..D {
                        acc[c] += m as f64 * p[j][c];
                    }
                }
            }
            out[i] = acc;
        }
    }
}

pub fn build_matrix(pi: &Permutation) -> MomentumMatrix {
    let n = pi.n();
    let e = pi.extended();
    let mut m = MomentumMatrix { n, entries: vec![0; (n + 1) * (n + 1)] };
    for j in 1..=n + 1 {
        let (a, b) = (e.at(j - 1), e.at(j));
        for i in 1..=n + 1 {
            let v = if a < i && i <= b {
                1
            } else if b < i && i <= a {
                -1
            } else {
                0
            };
            m.set(i, j, v);
        }
    }
    m
}

/// Largest violation of the Kirchhoff constraints of `Delta_pi`:
/// `p_{n+1} = p'_{n+1}` and `(p_{j+1} - p_j) = (p'_{pi(j)+1} - p'_{pi(j)})` for `j <= n`.
pub fn delta_constraints_residual(pi: &Permutation, p: &[Vec<f64>], pp: &[Vec<f64>]) -> Result<f64> {
    let n = pi.n();
    if p.len() != n + 1 || pp.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: p.len().min(pp.len()) });
    }
    let d = p[0].len();
    let mut worst: f64 = 0.0;
    for c in 0..d {
        worst = worst.max((p[n][c] - pp[n][c]).abs());
        for j in 1..=n {
            let k = pi.at(j);
            let lhs = p[j][c] - p[j - 1][c];
            let rhs = pp[k][c] - pp[k - 1][c];
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_identity() {
        for n in 0..6 {
            assert_eq!(build_matrix(&Permutation::identity(n)), MomentumMatrix::identity(n));
        }
    }

    #[test]
    fn transposition_matrix() {
        let m = build_matrix(&Permutation::new(vec![2, 1]).unwrap());
        assert_eq!(m.rows(), vec![vec![1, 0, 0], vec![1, -1, 1], vec![0, 0, 1]]);
    }

    #[test]
    fn towers_follow_extension() {
        let pi = Permutation::new(vec![3, 1, 2]).unwrap();
        let m = build_matrix(&pi);
        let t = m.towers();
        // column j spans rows min(pi~(j-1), pi~(j)) + 1 ..= max(...)
        let e = pi.extended();
        for tw in t {
            let (a, b) = (e.at(tw.column - 1), e.at(tw.column));
            assert_eq!((tw.top, tw.bottom), (a.min(b) + 1, a.max(b)));
            assert_eq!(tw.sign, if a < b { 1 } else { -1 });
        }
    }

    #[test]
    fn apply_checks_dimension() {
        let m = MomentumMatrix::identity(2);
        assert!(m.apply(&[vec![1.0], vec![2.0]]).is_err());
    }
}

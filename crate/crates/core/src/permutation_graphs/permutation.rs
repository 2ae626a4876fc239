use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bijection of `{1..n}` stored as the one-line sequence `(pi(1), ..., pi(n))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n + 1];
        for &v in &map {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!("value {v} outside 1..={n}")));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (1..=n).collect() }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// `pi(j)` for `1 <= j <= n`.
    pub fn at(&self, j: usize) -> usize {
        self.map[j - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (j, &v) in self.map.iter().enumerate() {
            inv[v - 1] = j + 1;
        }
        Self { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &v)| v == j + 1)
    }

    pub fn extended(&self) -> ExtendedPermutation {
        ExtendedPermutation::new(self.clone())
    }

    /// Lexicographic iterator over all of `S_n`.
    pub fn all(n: usize) -> Permutations {
        Permutations { next: Some((1..=n).collect()) }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts whitespace or comma separated values, optionally in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned = s.replace(['(', ')', '[', ']', ','], " ");
        let map = cleaned
            .split_whitespace()
            .map(|tok| tok.parse::<usize>().map_err(|e| Error::InvalidPermutation(format!("{tok}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        let mut a = cur.clone();
        let n = a.len();
        if n >= 2 {
            let mut i = n - 1;
            while i > 0 && a[i - 1] >= a[i] {
                i -= 1;
            }
            if i > 0 {
                let mut j = n - 1;
                while a[j] <= a[i - 1] {
                    j -= 1;
                }
                a.swap(i - 1, j);
                a[i..].reverse();
                self.next = Some(a);
            }
        }
        Some(Permutation { map: cur })
    }
}

/// `pi~` on `{0..n+1}` with `pi~(0) = 0` and `pi~(n+1) = n+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedPermutation {
    base: Permutation,
}

impl ExtendedPermutation {
    pub fn new(base: Permutation) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn at(&self, j: usize) -> usize {
        let n = self.base.n();
        match j {
            0 => 0,
            j if j == n + 1 => n + 1,
            j => self.base.at(j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![3, 1]).is_err());
    }

    #[test]
    fn parses_one_line_notation() {
        let p: Permutation = "(1, 2, 7, 6, 5, 3, 4, 8)".parse().unwrap();
        assert_eq!(p.as_slice(), &[1, 2, 7, 6, 5, 3, 4, 8]);
        assert_eq!(p.to_string(), "1 2 7 6 5 3 4 8");
    }

    #[test]
    fn enumerates_factorial_many() {
        assert_eq!(Permutation::all(5).count(), 120);
        assert_eq!(Permutation::all(1).count(), 1);
        let mut v: Vec<_> = Permutation::all(4).collect();
        let len = v.len();
        v.dedup();
        assert_eq!(v.len(), len);
    }

    #[test]
    fn extension_fixes_boundary() {
        let e = Permutation::new(vec![2, 1]).unwrap().extended();
        assert_eq!((0..=3).map(|j| e.at(j)).collect::<Vec<_>>(), vec![0, 2, 1, 3]);
    }
}

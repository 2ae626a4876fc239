use serde::{Deserialize, Serialize};

use super::classify::degree;
use super::permutation::Permutation;
use crate::error::{Error, Result};

pub const MAX_LUMP_VERTICES: usize = 10;

/// Partition of the vertex set `{1..n}`. Vertices `1..=n/2` sit on the upper
/// collision history, `n/2+1..=n` on the lower one (vertex `n/2 + k` is the
/// `k`-th lower collision).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::OutOfRange("empty block".into()));
            }
            for &v in b {
                if v == 0 || v > n || seen[v] {
                    return Err(Error::OutOfRange(format!("vertex {v} missing from 1..={n} or repeated")));
                }
                seen[v] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::OutOfRange("blocks do not cover every vertex".into()));
        }
        Ok(Self { n, blocks })
    }

    /// `s(B) = 1/2 * sum of |B_j| over blocks with |B_j| >= 4`.
    pub fn s(&self) -> f64 {
        0.5 * self.blocks.iter().filter(|b| b.len() >= 4).map(|b| b.len()).sum::<usize>() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpBreakup {
    pub pi: Permutation,
    pub degree: usize,
    pub s: f64,
    pub bound_met: bool,
    pub compatible_count: u64,
}

fn bijections(tops: &[usize], bots: &[usize]) -> Vec<Vec<(usize, usize)>> {
    Permutation::all(bots.len())
        .map(|p| tops.iter().enumerate().map(|(i, &t)| (t, bots[p.at(i + 1) - 1])).collect())
        .collect()
}

/// Exhaustive search over pairings compatible with `b` for the largest degree.
pub fn lump_breakup(b: &Partition) -> Result<LumpBreakup> {
    if b.n > MAX_LUMP_VERTICES {
        return Err(Error::OutOfRange(format!("{} vertices exceed the exhaustive limit {MAX_LUMP_VERTICES}", b.n)));
    }
    if let Some(odd) = b.blocks.iter().find(|blk| blk.len() % 2 == 1) {
        return Err(Error::OddBlock(odd.len()));
    }
    let m = b.n / 2;
    let mut per_block = vec![];
    for blk in &b.blocks {
        let tops: Vec<usize> = blk.iter().copied().filter(|&v| v <= m).collect();
        let bots: Vec<usize> = blk.iter().copied().filter(|&v| v > m).map(|v| v - m).collect();
        if tops.len() != bots.len() {
            return Err(Error::Degenerate(format!("block {blk:?} has {} upper and {} lower vertices", tops.len(), bots.len())));
        }
        per_block.push(bijections(&tops, &bots));
    }
    let mut best: Option<(usize, Permutation)> = None;
    let mut count = 0u64;
    let mut choice = vec![0usize; per_block.len()];
    loop {
        let mut map = vec![0usize; m];
        for (k, &c) in choice.iter().enumerate() {
            for &(t, bt) in &per_block[k][c] {
                map[t - 1] = bt;
            }
        }
        let pi = Permutation::new(map)?;
        let d = degree(&pi);
        count += 1;
        if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
            best = Some((d, pi));
        }
        // odometer increment
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < per_block[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    let (d, pi) = best.expect("at least one compatible pairing");
    let s = b.s();
    Ok(LumpBreakup { pi, degree: d, s, bound_met: d as f64 >= 0.5 * s, compatible_count: count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_only() {
        let b = Partition::new(4, vec![vec![1, 4], vec![2, 3]]).unwrap();
        let r = lump_breakup(&b).unwrap();
        assert_eq!(r.s, 0.0);
        assert_eq!(r.pi.as_slice(), &[2, 1]);
        assert!(r.bound_met);
    }

    #[test]
    fn single_lump_of_four() {
        let b = Partition::new(4, vec![vec![1, 2, 3, 4]]).unwrap();
        let r = lump_breakup(&b).unwrap();
        assert_eq!(r.s, 2.0);
        assert_eq!(r.compatible_count, 2);
        assert!(r.degree >= 1);
    }

    #[test]
    fn two_lumps_of_four() {
        let b = Partition::new(8, vec![vec![1, 2, 5, 6], vec![3, 4, 7, 8]]).unwrap();
        let r = lump_breakup(&b).unwrap();
        assert_eq!(r.s, 4.0);
        assert!(r.degree >= 2);
    }

    #[test]
    fn odd_blocks_rejected() {
        let b = Partition::new(4, vec![vec![1, 2, 3], vec![4]]).unwrap();
        assert_eq!(lump_breakup(&b), Err(Error::OddBlock(3)));
    }
}

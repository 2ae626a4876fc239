use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classify::degree;
use super::permutation::Permutation;
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_ORDER: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub n: usize,
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
    /// Smallest `C` with `count(d) <= (C n)^d` for every `d >= 1`.
    pub empirical_c: f64,
}

pub fn enumerate_by_degree(n: usize) -> Result<DegreeHistogram> {
    if n == 0 || n > MAX_ENUMERATION_ORDER {
        return Err(Error::OutOfRange(format!("enumeration order {n} not in 1..={MAX_ENUMERATION_ORDER}")));
    }
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for pi in Permutation::all(n) {
        *counts.entry(degree(&pi)).or_insert(0u64) += 1;
        total += 1;
    }
    let empirical_c = counts
        .iter()
        .filter(|(&d, _)| d >= 1)
        .map(|(&d, &c)| (c as f64).powf(1.0 / d as f64) / n as f64)
        .fold(0.0, f64::max);
    Ok(DegreeHistogram { n, counts, total, empirical_c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_orders() {
        let h1 = enumerate_by_degree(1).unwrap();
        assert_eq!(h1.counts, BTreeMap::from([(0, 1)]));
        let h2 = enumerate_by_degree(2).unwrap();
        assert_eq!(h2.counts, BTreeMap::from([(0, 1), (2, 1)]));
        assert!(enumerate_by_degree(10).is_err());
    }
}

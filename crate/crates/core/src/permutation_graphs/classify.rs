use serde::{Deserialize, Serialize};

use super::permutation::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexClass {
    Peak,
    Valley,
    Slope,
    Ladder,
    Last,
}

/// Row-index classification `I_p, I_v, I_s, I_l` of a permutation of order `n`.
///
/// Row `i <= n` is classified through the graph point `(pi^{-1}(i), i)`;
/// row `n+1` is always `Last`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexClassification {
    pub n: usize,
    /// `classes[i - 1]` is the class of row `i`, for `i` in `1..=n+1`.
    pub classes: Vec<IndexClass>,
    pub peaks: Vec<usize>,
    pub valleys: Vec<usize>,
    pub slopes: Vec<usize>,
    pub ladders: Vec<usize>,
}

impl IndexClassification {
    pub fn class_of(&self, row: usize) -> IndexClass {
        self.classes[row - 1]
    }

    pub fn p(&self) -> usize {
        self.peaks.len()
    }

    pub fn v(&self) -> usize {
        self.valleys.len()
    }

    pub fn s(&self) -> usize {
        self.slopes.len()
    }

    pub fn l(&self) -> usize {
        self.ladders.len()
    }

    pub fn degree(&self) -> usize {
        self.n - self.l()
    }
}

fn point_class(pi: &Permutation, j: usize) -> IndexClass {
    let e = pi.extended();
    let (left, mid, right) = (e.at(j - 1), e.at(j), e.at(j + 1));
    if mid < left.min(right) {
        IndexClass::Peak
    } else if mid > left.max(right) {
        IndexClass::Valley
    } else if mid - 1 == left || mid - 1 == right {
        IndexClass::Ladder
    } else {
        IndexClass::Slope
    }
}

pub fn classify(pi: &Permutation) -> IndexClassification {
    let n = pi.n();
    let inv = pi.inverse();
    let mut out = IndexClassification {
        n,
        classes: Vec::with_capacity(n + 1),
        peaks: vec![],
        valleys: vec![],
        slopes: vec![],
        ladders: vec![],
    };
    for i in 1..=n {
        let c = point_class(pi, inv.at(i));
        match c {
            IndexClass::Peak => out.peaks.push(i),
            IndexClass::Valley => out.valleys.push(i),
            IndexClass::Slope => out.slopes.push(i),
            IndexClass::Ladder => out.ladders.push(i),
            IndexClass::Last => unreachable!(),
        }
        out.classes.push(c);
    }
    out.classes.push(IndexClass::Last);
    out
}

/// `n - l(pi)`.
pub fn degree(pi: &Permutation) -> usize {
    classify(pi).degree()
}

/// Preliminary degree: number of indices `i` with neither `|pi(i) - pi(i-1)| = 1`
/// nor `|pi(i) - pi(i+1)| = 1` (boundary values from the extension).
/// Kept only for comparison with [`degree`].
pub fn degree_temporary(pi: &Permutation) -> usize {
    let e = pi.extended();
    (1..=pi.n())
        .filter(|&i| {
            let m = e.at(i) as i64;
            (m - e.at(i - 1) as i64).abs() != 1 && (m - e.at(i + 1) as i64).abs() != 1
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_all_ladder() {
        for n in 1..6 {
            let c = classify(&Permutation::identity(n));
            assert_eq!(c.l(), n);
            assert_eq!(c.degree(), 0);
            assert_eq!(degree_temporary(&Permutation::identity(n)), 0);
        }
    }

    #[test]
    fn transposition_of_two() {
        let c = classify(&Permutation::new(vec![2, 1]).unwrap());
        assert_eq!(c.peaks, vec![1]);
        assert_eq!(c.valleys, vec![2]);
        assert_eq!(c.degree(), 2);
    }

    #[test]
    fn eight_element_example() {
        let pi = Permutation::new(vec![1, 2, 7, 6, 5, 3, 4, 8]).unwrap();
        let c = classify(&pi);
        assert_eq!(c.peaks, vec![3]);
        assert_eq!(c.valleys, vec![7]);
        assert_eq!(c.slopes, vec![5, 8]);
        assert_eq!(c.ladders, vec![1, 2, 4, 6]);
        assert_eq!(c.degree(), 4);
        assert_eq!(c.class_of(9), IndexClass::Last);
    }
}

//! Order of integration for a pairing graph: supremum bounds on the tree
//! propagators above a peak, then successive elimination of the others.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::permutation_graphs::{build_matrix, classify, IndexClass, MomentumMatrix, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationStep {
    /// Tree (primed) momentum whose beta-factor is integrated out.
    pub row: usize,
    /// Loop momentum used as integration variable.
    pub column: usize,
    /// Remaining propagators that contain `column` at this step.
    pub factors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationPlan {
    pub n: usize,
    /// Rows bounded by the supremum norm, peaks plus safeguard rows.
    pub linf_rows: Vec<usize>,
    /// Subset of `linf_rows` added because the step would repeat a point singularity.
    pub safeguard_rows: Vec<usize>,
    pub steps: Vec<EliminationStep>,
    /// Columns left in alpha-factors only, integrated at the end.
    pub remaining: Vec<usize>,
    /// All loop momenta in integration order.
    pub order: Vec<usize>,
    pub ladder_segments: Vec<Vec<usize>>,
    pub gain_exponent: usize,
    pub degree: usize,
}

impl IntegrationPlan {
    /// Replays the plan against `M(pi)` and checks that every step sees at most two factors.
    pub fn is_executable(&self, m: &MomentumMatrix) -> bool {
        let k = m.size();
        let mut beta: Vec<bool> = (1..=k).map(|r| !self.linf_rows.contains(&r) && r != k).collect();
        let mut alpha = vec![true; k];
        for st in &self.steps {
            if !beta[st.row - 1] || !alpha[st.column - 1] || m.get(st.row, st.column) == 0 {
                return false;
            }
            let count = 1 + (1..=k).filter(|&r| beta[r - 1] && m.get(r, st.column) != 0).count();
            if count > 2 || count != st.factors {
                return false;
            }
            beta[st.row - 1] = false;
            alpha[st.column - 1] = false;
        }
        beta.iter().all(|b| !b)
    }
}

fn normalized(mut u: Vec<i8>) -> Vec<i8> {
    if let Some(&first) = u.iter().find(|&&x| x != 0) {
        if first < 0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    u
}

pub fn integration_plan(pi: &Permutation) -> IntegrationPlan {
    let n = pi.n();
    let k = n + 1;
    let m = build_matrix(pi);
    let cls = classify(pi);
    let bottoms: Vec<usize> = {
        let mut b = vec![0; k];
        for t in m.towers() {
            b[t.column - 1] = t.bottom;
        }
        b
    };
    let mut linf: Vec<usize> = cls.peaks.clone();
    let mut safeguard = vec![];
    let mut eliminated = vec![false; k];
    let mut steps = vec![];
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    for row in 1..k {
        if linf.contains(&row) {
            continue;
        }
        let Some(col) = (1..=k).find(|&c| !eliminated[c - 1] && bottoms[c - 1] == row) else {
            linf.push(row);
            safeguard.push(row);
            continue;
        };
        let mut u: Vec<i8> = (1..=k).map(|c| m.get(row, c)).collect();
        u[col - 1] = 0;
        let u = normalized(u);
        // consecutive ladders share their shift by construction and are resummed separately
        let ladder = cls.class_of(row) == IndexClass::Ladder;
        if !ladder && u.iter().any(|&x| x != 0) && !seen.insert(u) {
            linf.push(row);
            safeguard.push(row);
            continue;
        }
        // rows above `row` are gone, so only this beta-factor and the alpha-factor contain `col`
        steps.push(EliminationStep { row, column: col, factors: 2 });
        eliminated[col - 1] = true;
    }
    linf.sort_unstable();
    let remaining: Vec<usize> = (1..=k).filter(|&c| !eliminated[c - 1]).collect();
    let mut order: Vec<usize> = steps.iter().map(|s| s.column).collect();
    order.extend(&remaining);
    let mut ladder_segments: Vec<Vec<usize>> = vec![];
    for &l in &cls.ladders {
        match ladder_segments.last_mut() {
            Some(seg) if *seg.last().unwrap() + 1 == l => seg.push(l),
            _ => ladder_segments.push(vec![l]),
        }
    }
    IntegrationPlan {
        n,
        linf_rows: linf,
        safeguard_rows: safeguard,
        steps,
        remaining,
        order,
        ladder_segments,
        gain_exponent: cls.v() + cls.s(),
        degree: cls.degree(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_one_ladder_segment() {
        let p = integration_plan(&Permutation::identity(5));
        assert!(p.linf_rows.is_empty());
        assert_eq!(p.ladder_segments, vec![vec![1, 2, 3, 4, 5]]);
        assert_eq!(p.gain_exponent, 0);
    }

    #[test]
    fn worked_example_order() {
        let pi = Permutation::new(vec![2, 6, 4, 1, 5, 3]).unwrap();
        let rows: Vec<Vec<i8>> = vec![
            vec![1, 0, 0, 0, 0, 0, 0],
            vec![1, 0, 0, -1, 1, 0, 0],
            vec![0, 1, 0, -1, 1, 0, 0],
            vec![0, 1, 0, -1, 1, -1, 1],
            vec![0, 1, -1, 0, 1, -1, 1],
            vec![0, 1, -1, 0, 0, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 1],
        ];
        assert_eq!(build_matrix(&pi).rows(), rows);
        let p = integration_plan(&pi);
        assert_eq!(p.linf_rows, vec![1, 3]);
        let cols: Vec<usize> = p.steps.iter().map(|s| s.column).collect();
        assert_eq!(cols, vec![1, 4, 5, 2]);
        assert_eq!(p.remaining, vec![3, 6, 7]);
        assert!(p.is_executable(&build_matrix(&pi)));
    }
}

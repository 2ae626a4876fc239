//! Collision-history permutations and their momentum matrices.
//!
//! Everything here is 1-indexed: a permutation of order `n` maps `{1..n}`
//! onto itself, its extension fixes `0` and `n+1`, and the momentum matrix
//! has rows and columns `1..=n+1`.

mod classify;
mod connected;
mod enumerate;
mod lumps;
mod matrix;
mod permutation;
mod unimodular;

pub use classify::{classify, degree, degree_temporary, IndexClass, IndexClassification};
pub use connected::{
    connected_graph_coefficients, connected_graph_identity_residual, set_partitions,
};
pub use enumerate::{enumerate_by_degree, DegreeHistogram};
pub use lumps::{lump_breakup, LumpBreakup, Partition};
pub use matrix::{build_matrix, delta_constraints_residual, MomentumMatrix, Tower};
pub use permutation::{ExtendedPermutation, Permutation, Permutations};
pub use unimodular::{all_minors_unimodular, check_unimodular, integer_determinant, UnimodularReport, EXHAUSTIVE_MAX};

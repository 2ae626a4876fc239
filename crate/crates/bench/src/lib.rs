//! Fixtures shared by the criterion benches.

use qdiff_core::Permutation;

/// The eight-element permutation whose momentum matrix is the standard worked example.
pub fn example_permutation() -> Permutation {
    Permutation::new(vec![1, 2, 7, 6, 5, 3, 4, 8]).expect("valid permutation")
}

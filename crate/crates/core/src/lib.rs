//! Numerical workbench for the weak-coupling derivation of quantum diffusion.
//!
//! The crate is split into four layers:
//!
//! * [`permutation_graphs`]: collision-history permutations, their index
//!   classification, the momentum matrices `M(pi)` and the lump combinatorics.
//! * [`diagram_integrator`]: Feynman-graph values in momentum space with
//!   renormalized propagators, the integration-plan algorithm, power counting
//!   on general graphs and numerical checks of the propagator inequalities.
//! * [`stochastic_kinetics`]: CLT, Green-Kubo, velocity jump processes and
//!   linear Boltzmann particle dynamics.
//! * [`lattice_schrodinger`]: exact small-box Anderson dynamics, Duhamel
//!   expansion and lattice Wigner transforms.
//!
//! Shared value types live in [`types`] and numerical helpers in [`numerics`].

pub mod diagram_integrator;
pub mod error;
pub mod lattice_schrodinger;
pub mod numerics;
pub mod permutation_graphs;
pub mod stochastic_kinetics;
pub mod types;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use types::{Estimate, FeynmanValue, Verdict};

pub use permutation_graphs::{
    build_matrix, classify, degree, ExtendedPermutation, IndexClassification, MomentumMatrix,
    Partition, Permutation,
};

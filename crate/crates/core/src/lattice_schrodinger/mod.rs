//! Exact small-box Anderson dynamics `H = H_0 + lambda V` on a periodic lattice:
//! evolution, finite Duhamel expansion, Wigner transforms and displacement.

mod duhamel;
mod hamiltonian;
mod lattice;
mod low_order;
mod msd;
mod wigner;

pub use duhamel::{duhamel_terms, unitarity_bound_check, DuhamelTerms, UnitarityBoundCheck, MAX_DUHAMEL_ORDER};
pub use hamiltonian::{
    build_hamiltonian, chebyshev_evolve, evolve, FreePropagator, Hamiltonian, SpectralPropagator, DENSE_SITE_LIMIT,
};
pub use lattice::{BoxFft, LatticeBox, PotentialLaw, RandomPotential, WaveFunction};
pub use low_order::{low_order_wigner, LowOrderConfig, LowOrderReport, LowOrderRow};
pub use msd::{
    ballistic_oracle, free_ballistic_fit, msd, msd_curve, msd_growth, BallisticFit, GrowthReport, MsdResult,
    BOUNDARY_MASS_CAP,
};
pub use wigner::{fourier_at, wigner, wigner_continuity, wigner_fourier, ContinuityCheck, WignerField};

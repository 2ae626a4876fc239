//! Momentum-space evaluation of Feynman graphs and the supporting estimates.

mod dispersion;
mod dos;

pub use dispersion::{wrap, Dispersion, DispersionKind};
pub use dos::{elliptic_k, elliptic_k_complement, DensityOfStates};
mod self_energy;

pub use self_energy::{
    resummation_check, self_energy_theta, sigma_regularized, stieltjes, FormFactor, Model, ResummationReport, SelfEnergy,
};
mod val;

pub use val::{
    ladder_one_closed_form, simplex_integral_nested, val_monte_carlo, val_monte_carlo_with, val_time_domain,
    PropagatorTable, TimeDomainConfig, ValConfig,
};
mod plan;
pub use plan::{integration_plan, EliminationStep, IntegrationPlan};
mod power_count;
pub use power_count::{brute_force_omega, power_count, GeneralGraph, PowerCount, TorusProfile};
mod shell;
pub use shell::{BallShell, LatticeShell};
mod bounds;
pub use bounds::{
    bound_suite, exact1_report, exact1_value, lattice_square_resolvent, BoundSuiteConfig, BoundSuiteReport, Exact1Report,
    InequalityReport, SuiteLevel,
};
mod level_set;
pub use level_set::{
    lattice_decay, level_set_fourier, level_set_fourier_many, level_set_integral, sphere_decay, sphere_fourier, DecayReport, FourierEstimate,
};
mod main_term;
pub use main_term::{
    geometric_closed_form, geometric_partial_sum, geometric_ratio, key_lemma_check, main_term_identities, residue_integral_exact,
    residue_integral_quadrature, KeyLemmaReport, MainTermReport,
};
mod delta_family;
pub use delta_family::{
    delta_family_check, q_family_integral, q_t_squared, r_family_integral, r_function, sinc_squared_integral, DeltaFamilyReport,
    DeltaFamilyRow,
};

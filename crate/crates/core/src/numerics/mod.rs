//! Quadrature, divided differences, running statistics and seeding helpers.

mod divdiff;
mod quadrature;
mod rng;
mod stats;

pub use divdiff::{exp_divided_difference, simplex_integral};
pub use quadrature::{
    adaptive_gk, adaptive_gk_breaks, gauss_legendre, integrate_gl, GaussLegendre, QuadResult,
};
pub use rng::{derive_seed, seeded_rng, Rng64};
pub use stats::{fit_line, ks_statistic, ComplexStats, LineFit, RunningStats};

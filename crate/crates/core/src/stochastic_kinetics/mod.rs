//! Classical limit objects: CLT for rescaled sums, Green-Kubo coefficients,
//! the velocity jump process on an energy shell and linear Boltzmann particles.

mod boltzmann;
mod clt;
mod green_kubo;
mod jump;
mod shell_sampler;
mod surface;

pub use boltzmann::{boltzmann_particle_sim, Histogram, InitialLaw, ParticleEnsemble};
pub use clt::{clt_statistics, clt_variance_vs_time, step_moments, CltLinearity, CltStatistics, StepDistribution, StepLaw};
pub use green_kubo::{green_kubo_correlated, GreenKuboConfig, GreenKuboReport, MarkovVelocities};
pub use jump::{green_kubo_jump, jump_process, jump_process_from, GreenKuboJumpReport, JumpKernel, Trajectory};
pub use shell_sampler::ShellSampler;
pub use surface::{diffusion_matrix_surface, DiffusionMatrix};

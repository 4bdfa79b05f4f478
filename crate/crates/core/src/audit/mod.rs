//! Energy bookkeeping along regularized trajectories.

mod bootstrap;
mod increment;
mod mass;
mod perturbation;

pub use crate::dynamics::e_n_eval;
pub use bootstrap::{energy_bootstrap, BootstrapInterval, BootstrapReport};
pub use increment::{convergence_slope, increment_decomposition, time_derivative, IncrementReport};
pub use mass::{mass_check, MassDrift};
pub use perturbation::{
    interpolation_check, interpolation_exponent, perturbation_experiment, InterpolationCheck, PerturbationReport,
    PerturbationRun, PerturbationSetup,
};

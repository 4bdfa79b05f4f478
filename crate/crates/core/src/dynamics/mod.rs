//! Forced, regularized energy-critical NLS on periodic boxes.

pub mod convergence;
pub mod duhamel;
pub mod forcing;
pub mod nonlinearity;
pub mod scattering;
pub mod solver;
pub mod trajectory;

pub use convergence::{regularized_convergence, ConvergenceReport, ConvergenceRun};
pub use duhamel::{duhamel_defects, duhamel_residual};
pub use forcing::{free_propagate, ForcingTerm};
pub use nonlinearity::{critical_exponent, e_n_eval, g_eval, g_n_eval, power, RegularizedNonlinearity};
pub use scattering::{extract_scattering_state, ScatteringReport};
pub use solver::{evolve, solve_forced, MAX_PHASE};
pub use trajectory::{Trajectory, TrajectoryMeta};

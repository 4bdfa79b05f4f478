//! Space-time norms on discrete trajectories, exponent arithmetic and Strichartz experiments.

pub mod energy;
pub mod exponents;
pub mod radial_flow;
pub mod spacetime;
pub mod spec;
pub mod strichartz;

pub use energy::{energy, energy_n, kinetic_energy};
pub use exponents::{
    admissible_check, admissible_partner, derivative_gain, gain_endpoint, gain_supremum, optimal_p0, s_d,
    s_d_second_branch,
};
pub use radial_flow::{radial_strichartz_experiment, RadialRandomization, RadialSpace};
pub use spacetime::{partition_profile, spacetime_norm, time_partition, NormProfile, Partition};
pub use spec::{v_pair, x_pair, y_pair, NormName, NormSpec, Term};
pub use strichartz::{
    free_trajectory, grid_besov_value, randomized_strichartz_experiment, strichartz_ratio, summarize, MomentStat,
    StrichartzSetup,
    StrichartzStats,
};

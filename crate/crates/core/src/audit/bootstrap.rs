use serde::{Deserialize, Serialize};

use crate::dynamics::{ForcingTerm, RegularizedNonlinearity, Trajectory};
use crate::error::{Error, Result};
use crate::norms::{energy_n, partition_profile, NormProfile, NormSpec};

/// One interval of the energy bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub interval: (f64, f64),
    pub z_norm: f64,
    /// `sup_{t ∈ I_j} E_n(v(t))`.
    pub energy_sup: f64,
    /// `E_n(v(t_{j-1}))`.
    pub energy_prev: f64,
    /// `‖F‖_{∞,2d/(d-2)}^{2(d-2)/(d-6)} + ‖F‖_{∞,2d/(d-2)}^{2(d+2)/(d-2)}` on `I_j`.
    pub forcing: f64,
    /// `energy_sup / (1 + energy_prev + forcing)`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub eta: f64,
    pub sigma: f64,
    pub intervals: Vec<BootstrapInterval>,
    pub constant_max: f64,
    pub constant_min: f64,
}

/// Partitions the forcing by its `Z` norm at level `eta` and measures the
/// energy growth constant on every piece.
pub fn energy_bootstrap(
    traj: &Trajectory,
    forcing: &ForcingTerm,
    reg: &RegularizedNonlinearity,
    d: f64,
    eta: f64,
    sigma: f64,
) -> Result<BootstrapReport> {
    if d <= 6.0 {
        return Err(Error::Constraint(format!("energy bootstrap needs d > 6, got {d}")));
    }
    let z = NormSpec::z(d, sigma)?;
    let ftraj = traj.map_states(|t, _| forcing.evaluate(t));
    let partition = partition_profile(&NormProfile::build(&ftraj, &z), z.alpha(), eta)?;
    let r = 2.0 * d / (d - 2.0);
    let f_sup: Vec<f64> = ftraj.states().iter().map(|f| f.lp_norm(r)).collect();
    let energies: Vec<f64> = traj.states().iter().map(|v| energy_n(v, reg)).collect();
    let intervals: Vec<BootstrapInterval> = partition
        .indices
        .iter()
        .zip(&partition.norms)
        .map(|(&(i0, i1), &z_norm)| {
            let fs = f_sup[i0..=i1].iter().cloned().fold(0.0, f64::max);
            let forcing = fs.powf(2.0 * (d - 2.0) / (d - 6.0)) + fs.powf(2.0 * (d + 2.0) / (d - 2.0));
            let energy_sup = energies[i0..=i1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let energy_prev = energies[i0];
            BootstrapInterval {
                interval: (traj.times()[i0], traj.times()[i1]),
                z_norm,
                energy_sup,
                energy_prev,
                forcing,
                constant: energy_sup / (1.0 + energy_prev + forcing),
            }
        })
        .collect();
    let constant_max = intervals.iter().map(|i| i.constant).fold(f64::NEG_INFINITY, f64::max);
    let constant_min = intervals.iter().map(|i| i.constant).fold(f64::INFINITY, f64::min);
    Ok(BootstrapReport { eta, sigma, intervals, constant_max, constant_min })
}

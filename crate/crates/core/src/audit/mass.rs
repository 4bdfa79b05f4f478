use serde::{Deserialize, Serialize};

use crate::dynamics::{ForcingTerm, Trajectory};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDrift {
    pub initial_norm: f64,
    /// `|‖u(t)‖₂ - ‖u(t₀)‖₂| / ‖u(t₀)‖₂` per snapshot, with `u = v + F`.
    pub drift: Vec<f64>,
    pub max_drift: f64,
}

pub fn mass_check(traj: &Trajectory, forcing: &ForcingTerm) -> Result<MassDrift> {
    let norms = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, v)| Ok(v.try_add(&forcing.evaluate(t))?.l2_norm()))
        .collect::<Result<Vec<f64>>>()?;
    let n0 = norms[0];
    let drift: Vec<f64> = norms
        .iter()
        .map(|n| if n0 == 0.0 { (n - n0).abs() } else { (n - n0).abs() / n0 })
        .collect();
    let max_drift = drift.iter().cloned().fold(0.0, f64::max);
    Ok(MassDrift { initial_norm: n0, drift, max_drift })
}

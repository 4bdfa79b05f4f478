use super::forcing::free_propagate;
use super::trajectory::Trajectory;
use crate::error::Result;
use crate::field::Field;

/// Final profile `v₊ = e^{-iTΔ}v(T)` and the Cauchy curve of pulled-back profiles.
#[derive(Debug, Clone)]
pub struct ScatteringReport {
    pub v_plus: Field,
    /// Right endpoints of consecutive checkpoint pairs.
    pub times: Vec<f64>,
    /// `‖e^{-iT₂Δ}v(T₂) - e^{-iT₁Δ}v(T₁)‖_{Ḣ¹}` per pair.
    pub curve: Vec<f64>,
}

pub fn extract_scattering_state(traj: &Trajectory) -> Result<ScatteringReport> {
    let profiles: Vec<Field> = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(t, v)| free_propagate(v, -t))
        .collect();
    let mut curve = Vec::with_capacity(profiles.len().saturating_sub(1));
    for w in profiles.windows(2) {
        curve.push(w[1].try_sub(&w[0])?.hdot_norm(1.0));
    }
    Ok(ScatteringReport {
        v_plus: profiles[profiles.len() - 1].clone(),
        times: traj.times()[1..].to_vec(),
        curve,
    })
}

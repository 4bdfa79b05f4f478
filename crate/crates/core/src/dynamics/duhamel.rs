use num_complex::Complex64;

use super::forcing::{free_propagate, ForcingTerm};
use super::nonlinearity::RegularizedNonlinearity;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::quadrature::{simpson_weights, trapezoid_weights};

pub const MIN_SNAPSHOTS: usize = 5;

/// Quadrature weights for the first `n` uniformly spaced samples.
fn cumulative_weights(n: usize, h: f64) -> Vec<f64> {
    if n < 3 {
        trapezoid_weights(n, h)
    } else {
        simpson_weights(n, h).expect("n >= 3")
    }
}

/// Duhamel defect at every snapshot after the first.
///
/// In the interaction picture the mild formulation reads
/// `e^{-i(t-t0)Δ}v(t) = v0 - i∫_{t0}^t e^{-i(s-t0)Δ} g_n(F_n(s)+v(s)) ds`;
/// the defect is the L² norm of the difference.
pub fn duhamel_defects(traj: &Trajectory, forcing: &ForcingTerm, reg: &RegularizedNonlinearity) -> Result<Vec<f64>> {
    if traj.len() < MIN_SNAPSHOTS {
        return Err(Error::TooFewSnapshots(traj.len(), MIN_SNAPSHOTS));
    }
    let t0 = traj.start();
    let h = traj.spacing();
    let v0 = traj.first();
    let mut integrand: Vec<Field> = Vec::with_capacity(traj.len());
    let mut pulled: Vec<Field> = Vec::with_capacity(traj.len());
    for (t, v) in traj.times().iter().zip(traj.states()) {
        let u = if forcing.is_zero() { v.clone() } else { v.try_add(&forcing.evaluate(*t))? };
        let g = u.map(|z| reg.g_n(z));
        integrand.push(free_propagate(&g, -(t - t0)));
        pulled.push(free_propagate(v, -(t - t0)));
    }
    let len = v0.values().len();
    let mut out = Vec::with_capacity(traj.len() - 1);
    for k in 1..traj.len() {
        let w = cumulative_weights(k + 1, h);
        let mut acc = vec![Complex64::default(); len];
        for (wi, f) in w.iter().zip(&integrand) {
            for (a, z) in acc.iter_mut().zip(f.values()) {
                *a += z * wi;
            }
        }
        let i = Complex64::i();
        let defect: Vec<Complex64> = pulled[k]
            .values()
            .iter()
            .zip(v0.values())
            .zip(&acc)
            .map(|((p, v), a)| p - v + i * a)
            .collect();
        out.push(Field::new(*v0.grid(), defect)?.l2_norm());
    }
    Ok(out)
}

/// Maximum Duhamel defect over the snapshots.
pub fn duhamel_residual(traj: &Trajectory, forcing: &ForcingTerm, reg: &RegularizedNonlinearity) -> Result<f64> {
    Ok(duhamel_defects(traj, forcing, reg)?.into_iter().fold(0.0, f64::max))
}

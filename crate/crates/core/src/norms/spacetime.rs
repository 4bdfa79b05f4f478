use serde::{Deserialize, Serialize};

use super::spec::{NormSpec, Term};
use crate::dyadic::DyadicBand;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::{lp_of_moduli, Field};

/// Spatial norms `‖∇^k P_N v(t_i)‖_{L^r}` per term, block and snapshot.
///
/// Once built, the norm over any snapshot-aligned sub-interval costs only
/// sums over the cached values.
#[derive(Debug, Clone)]
pub struct NormProfile {
    times: Vec<f64>,
    terms: Vec<TermProfile>,
}

#[derive(Debug, Clone)]
struct TermProfile {
    q: f64,
    /// `(N^{2s}, spatial norms per snapshot)`; a single unit-weight block for plain terms.
    blocks: Vec<(f64, Vec<f64>)>,
    tail: f64,
}

fn spatial_norm(field: &Field, r: f64, deriv: u8) -> f64 {
    let cell = field.grid().cell_volume();
    if deriv == 0 {
        lp_of_moduli(field.values().iter().map(|v| v.norm()), r, cell)
    } else {
        lp_of_moduli(field.gradient_magnitude().into_iter(), r, cell)
    }
}

fn term_profile(states: &[Field], term: &Term) -> TermProfile {
    match term.besov_weight {
        None => TermProfile {
            q: term.q,
            blocks: vec![(1.0, states.iter().map(|s| spatial_norm(s, term.r, term.deriv)).collect())],
            tail: 0.0,
        },
        Some(w) => {
            let grid = *states[0].grid();
            let band = DyadicBand::for_grid(&grid);
            let blocks = band
                .frequencies()
                .into_iter()
                .map(|m| {
                    let table = band.table(&grid, m);
                    let norms = states
                        .iter()
                        .map(|s| spatial_norm(&s.apply_table(&table), term.r, term.deriv))
                        .collect();
                    (m.powf(2.0 * w), norms)
                })
                .collect();
            // The band's shells cover every lattice frequency; nothing is left over.
            TermProfile { q: term.q, blocks, tail: 0.0 }
        }
    }
}

/// `L^q` norm in time of sampled values on snapshots `i0..=i1` by the trapezoid rule.
fn time_norm(values: &[f64], q: f64, times: &[f64], i0: usize, i1: usize) -> f64 {
    if q.is_infinite() {
        return values[i0..=i1].iter().cloned().fold(0.0, f64::max);
    }
    let mut acc = 0.0;
    for i in i0..i1 {
        let h = times[i + 1] - times[i];
        acc += 0.5 * h * (values[i].powf(q) + values[i + 1].powf(q));
    }
    acc.powf(1.0 / q)
}

impl NormProfile {
    pub fn build(traj: &Trajectory, spec: &NormSpec) -> Self {
        NormProfile {
            times: traj.times().to_vec(),
            terms: spec.terms.iter().map(|t| term_profile(traj.states(), t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Norm over the snapshots `i0..=i1`.
    pub fn norm_between(&self, i0: usize, i1: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                if t.blocks.len() == 1 && t.blocks[0].0 == 1.0 && t.tail == 0.0 {
                    time_norm(&t.blocks[0].1, t.q, &self.times, i0, i1)
                } else {
                    t.blocks
                        .iter()
                        .map(|(w, v)| w * time_norm(v, t.q, &self.times, i0, i1).powi(2))
                        .sum::<f64>()
                        .sqrt()
                }
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_between(0, self.len() - 1)
    }

    /// Largest reported Besov tail (always 0 on a full-band grid).
    pub fn tail(&self) -> f64 {
        self.terms.iter().map(|t| t.tail).fold(0.0, f64::max)
    }
}

/// Discrete space-time norm of a trajectory.
pub fn spacetime_norm(traj: &Trajectory, spec: &NormSpec) -> f64 {
    NormProfile::build(traj, spec).norm()
}

/// Consecutive snapshot-aligned intervals with norm at most `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Snapshot index pairs `(i0, i1)`.
    pub indices: Vec<(usize, usize)>,
    pub intervals: Vec<(f64, f64)>,
    pub norms: Vec<f64>,
    pub total: f64,
    pub alpha: Option<f64>,
    /// `2(‖v‖/ε)^α`, when `α` is finite.
    pub bound: Option<f64>,
}

impl Partition {
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    /// `(Σ_j ‖v‖^α_{S(I_j)})^{1/α}`.
    pub fn alpha_sum(&self) -> Option<f64> {
        self.alpha
            .map(|a| self.norms.iter().map(|n| n.powf(a)).sum::<f64>().powf(1.0 / a))
    }
}

/// Greedy partition of a precomputed profile.
pub fn partition_profile(profile: &NormProfile, alpha: Option<f64>, eps: f64) -> Result<Partition> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let limit = eps * (1.0 + 1e-12);
    let last = profile.len() - 1;
    let mut indices = Vec::new();
    let mut norms = Vec::new();
    let mut start = 0;
    while start < last {
        let mut end = start + 1;
        while end < last && profile.norm_between(start, end + 1) <= limit {
            end += 1;
        }
        norms.push(profile.norm_between(start, end));
        indices.push((start, end));
        start = end;
    }
    if indices.is_empty() {
        indices.push((0, 0));
        norms.push(profile.norm_between(0, 0));
    }
    let total = profile.norm();
    let t = profile.times();
    Ok(Partition {
        intervals: indices.iter().map(|(a, b)| (t[*a], t[*b])).collect(),
        indices,
        norms,
        total,
        alpha,
        bound: alpha.map(|a| 2.0 * (total / eps).powf(a)),
    })
}

/// Splits the trajectory's window into consecutive pieces on which the norm is at most `eps`.
///
/// A piece is a single snapshot step when even that step exceeds `eps`.
pub fn time_partition(traj: &Trajectory, spec: &NormSpec, eps: f64) -> Result<Partition> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    partition_profile(&NormProfile::build(traj, spec), spec.alpha(), eps)
}

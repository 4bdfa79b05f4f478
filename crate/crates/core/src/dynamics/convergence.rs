use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forcing::ForcingTerm;
use super::nonlinearity::RegularizedNonlinearity;
use super::solver::solve_forced;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::norms::{spacetime_norm, NormSpec};

/// Run parameters shared by every level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRun {
    pub interval: (f64, f64),
    pub dt: f64,
    pub stride: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<u32>,
    /// `‖v_{n_k} - v_{n_{k+1}}‖` for consecutive levels.
    pub successive: Vec<f64>,
    /// `‖v_{n_k} - v_{n_max}‖`.
    pub to_reference: Vec<f64>,
    /// `‖F_{n_k} - F‖` over the run window.
    pub forcing_tails: Vec<f64>,
    /// Largest `|u|` seen at each level.
    pub amplitudes: Vec<f64>,
}

impl ConvergenceReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.successive.windows(2).all(|w| w[1] < w[0])
    }
}

fn free(datum: &Field, forcing: &ForcingTerm, traj: &Trajectory) -> Result<Trajectory> {
    let full = ForcingTerm::untruncated(datum, "full");
    let states = traj
        .times()
        .iter()
        .map(|t| forcing.evaluate(*t).try_sub(&full.evaluate(*t)))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::uniform(traj.start(), traj.end(), states)
}

/// Solves the forced regularized problem at each level and measures the Cauchy distances.
pub fn regularized_convergence(
    v0: &Field,
    forcing_datum: &Field,
    run: &ConvergenceRun,
    levels: &[u32],
    spec: &NormSpec,
) -> Result<ConvergenceReport> {
    if levels.len() < 2 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("levels must be increasing with at least two entries".into()));
    }
    let runs: Vec<(Trajectory, f64, f64)> = levels
        .par_iter()
        .map(|&n| {
            let reg = RegularizedNonlinearity::new(n, run.p)?;
            let forcing = ForcingTerm::new(forcing_datum, n, format!("P<=2^{n}"));
            let traj = solve_forced(v0, &forcing, &reg, run.interval, run.dt, run.stride)?;
            let tail = spacetime_norm(&free(forcing_datum, &forcing, &traj)?, spec);
            let amp = traj
                .times()
                .iter()
                .zip(traj.states())
                .map(|(t, v)| v.try_add(&forcing.evaluate(*t)).map(|u| u.max_abs()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((traj, tail, amp))
        })
        .collect::<Result<Vec<_>>>()?;
    let dist = |a: &Trajectory, b: &Trajectory| -> Result<f64> { Ok(spacetime_norm(&a.try_sub(b)?, spec)) };
    let last = &runs[runs.len() - 1].0;
    let successive = runs.windows(2).map(|w| dist(&w[0].0, &w[1].0)).collect::<Result<Vec<_>>>()?;
    let to_reference = runs.iter().map(|r| dist(&r.0, last)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        levels: levels.to_vec(),
        successive,
        to_reference,
        forcing_tails: runs.iter().map(|r| r.1).collect(),
        amplitudes: runs.iter().map(|r| r.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::norms::NormName;
    use num_complex::Complex64;

    fn low_modes(g: Grid, amp: f64) -> Field {
        // Spectrum supported on |ξ| ≤ 2 for a box of length 2π.
        Field::from_fn(g, |x| Complex64::new(amp * (1.0 + 0.5 * x[0].cos()), amp * 0.3 * (2.0 * x[0]).sin()))
    }

    #[test]
    fn identical_below_levels() {
        let g = Grid::new(1, 2.0 * std::f64::consts::PI, 32).unwrap();
        let run = ConvergenceRun { interval: (0.0, 0.2), dt: 0.01, stride: 4, p: 9.0 / 5.0 };
        let spec = NormSpec::named(NormName::V, 7.0, 0.01).unwrap();
        let r = regularized_convergence(&low_modes(g, 0.2), &low_modes(g, 0.3), &run, &[2, 4, 8], &spec).unwrap();
        assert!(r.amplitudes.iter().all(|a| *a < 2.0));
        assert!(r.successive.iter().all(|d| *d < 1e-13), "{:?}", r.successive);
        assert!(r.forcing_tails.iter().all(|d| *d < 1e-13));
    }

    #[test]
    fn cauchy_above_small_levels() {
        let g = Grid::new(1, 2.0 * std::f64::consts::PI, 32).unwrap();
        let run = ConvergenceRun { interval: (0.0, 0.2), dt: 0.002, stride: 10, p: 9.0 / 5.0 };
        let spec = NormSpec::named(NormName::V, 7.0, 0.01).unwrap();
        let r = regularized_convergence(&low_modes(g, 6.0), &low_modes(g, 2.0), &run, &[2, 4, 8, 16], &spec).unwrap();
        assert!(r.strictly_decreasing(), "{:?}", r.successive);
        assert!(r.amplitudes[0] > 8.0);
        assert!(r.to_reference[0] > 0.0);
    }

    #[test]
    fn rejects_unsorted_levels() {
        let g = Grid::new(1, 6.0, 8).unwrap();
        let run = ConvergenceRun { interval: (0.0, 0.1), dt: 0.01, stride: 1, p: 3.0 };
        let spec = NormSpec::lebesgue(2.0, 2.0, 0).unwrap();
        assert!(regularized_convergence(&Field::zeros(g), &Field::zeros(g), &run, &[4, 2], &spec).is_err());
    }
}

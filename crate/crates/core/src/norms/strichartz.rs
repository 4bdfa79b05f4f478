use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::derivative_gain;
use super::spec::NormSpec;
use super::spacetime::spacetime_norm;
use crate::dynamics::{free_propagate, Trajectory};
use crate::error::{Error, Result};
use crate::field::Field;

/// Moments `β` at which the randomized bound is sampled.
pub const BETAS: [f64; 3] = [1.0, 2.0, 4.0];

/// Free evolution `e^{itΔ}f` sampled on `snapshots` uniform times in `window`.
pub fn free_trajectory(datum: &Field, window: (f64, f64), snapshots: usize) -> Result<Trajectory> {
    if snapshots < 2 || !(window.1 > window.0) {
        return Err(Error::InvalidArgument("need two or more snapshots on a nonempty window".into()));
    }
    let states = (0..snapshots)
        .map(|i| {
            let t = window.0 + (window.1 - window.0) * i as f64 / (snapshots - 1) as f64;
            free_propagate(datum, t)
        })
        .collect();
    Trajectory::uniform(window.0, window.1, states)
}

/// `‖e^{itΔ}f‖_{L^q_t L^r_x(window)} / ‖f‖_{L²}`.
pub fn strichartz_ratio(datum: &Field, q: f64, r: f64, window: (f64, f64), snapshots: usize) -> Result<f64> {
    let norm = datum.l2_norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero datum".into()));
    }
    let traj = free_trajectory(datum, window, snapshots)?;
    Ok(spacetime_norm(&traj, &NormSpec::lebesgue(q, r, 0)?) / norm)
}

/// Parameters of one randomized Strichartz experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzSetup {
    pub s: f64,
    pub q: f64,
    pub p: f64,
    pub p0: f64,
    pub d_param: f64,
    pub window: (f64, f64),
    pub snapshots: usize,
    /// Weight `t^σ` on the time integrand; the window should then start at `t ≥ 1`.
    #[serde(default)]
    pub sigma_t: Option<f64>,
}

impl StrichartzSetup {
    /// Checks the exponent constraint and returns the derivative gain.
    pub fn gain(&self) -> Result<f64> {
        if self.p < self.p0 {
            return Err(Error::Constraint(format!("p = {} must be at least p0 = {}", self.p, self.p0)));
        }
        if self.snapshots < 2 || !(self.window.1 > self.window.0) || self.window.0 < 0.0 {
            return Err(Error::InvalidArgument("window must be a nonempty subset of [0, ∞) with two or more snapshots".into()));
        }
        if !(self.s >= 0.0) {
            return Err(Error::InvalidArgument(format!("s = {} must be nonnegative", self.s)));
        }
        derivative_gain(self.q, self.p0, self.d_param)
    }

    pub fn times(&self) -> Vec<f64> {
        let (a, b) = self.window;
        (0..self.snapshots)
            .map(|i| a + (b - a) * i as f64 / (self.snapshots - 1) as f64)
            .collect()
    }

    pub fn time_weight(&self, t: f64) -> f64 {
        match self.sigma_t {
            Some(s) => t.powf(s),
            None => 1.0,
        }
    }
}

/// Empirical `L^β_ω` moment of the per-draw norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStat {
    pub beta: f64,
    /// `(E X^β)^{1/β}`.
    pub moment: f64,
    /// `moment / ‖f‖_{H^s}`.
    pub ratio: f64,
    /// `ratio / √β`.
    pub normalized: f64,
    /// Delta-method standard error of `moment`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzStats {
    pub gain: f64,
    pub regularity: f64,
    pub hs_norm: f64,
    pub trials: usize,
    pub failed: Vec<u64>,
    pub values: Vec<f64>,
    pub moments: Vec<MomentStat>,
}

impl StrichartzStats {
    pub fn max_normalized(&self) -> f64 {
        self.moments.iter().map(|m| m.normalized).fold(0.0, f64::max)
    }

    /// Sample variance of the per-draw norms.
    pub fn variance(&self) -> f64 {
        let n = self.values.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n;
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }
}

/// Moments of per-draw values, reduced in index order. Failed draws (`None`) are
/// recorded and excluded.
pub fn summarize(values: &[Option<f64>], hs_norm: f64, gain: f64, s: f64) -> StrichartzStats {
    let failed = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| i as u64)
        .collect();
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let n = ok.len() as f64;
    let moments = BETAS
        .iter()
        .map(|&beta| {
            let pw: Vec<f64> = ok.iter().map(|x| x.powf(beta)).collect();
            let mean = pw.iter().sum::<f64>() / n;
            let var = if n > 1.0 {
                pw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let moment = mean.powf(1.0 / beta);
            let stderr = if mean > 0.0 {
                moment / (beta * mean) * (var / n).sqrt()
            } else {
                0.0
            };
            let ratio = moment / hs_norm;
            MomentStat {
                beta,
                moment,
                ratio,
                normalized: ratio / beta.sqrt(),
                stderr,
            }
        })
        .collect();
    StrichartzStats {
        gain,
        regularity: s + gain,
        hs_norm,
        trials: values.len(),
        failed,
        values: ok,
        moments,
    }
}

/// `‖t^σ e^{itΔ}g‖_{Ḃ^{reg}_{q,p,2}}` over the setup's window on the grid.
pub fn grid_besov_value(g: &Field, setup: &StrichartzSetup, regularity: f64) -> Result<f64> {
    let traj = free_trajectory(g, setup.window, setup.snapshots)?;
    let traj = if setup.sigma_t.is_some() {
        traj.map_states(|t, s| s.scale(Complex64::new(setup.time_weight(t), 0.0)))
    } else {
        traj
    };
    Ok(spacetime_norm(&traj, &NormSpec::besov(setup.q, setup.p, regularity)?))
}

/// Randomized Strichartz experiment on the grid: `draws(trial)` yields `f^ω`.
pub fn randomized_strichartz_experiment(
    datum: &Field,
    setup: &StrichartzSetup,
    draws: impl Fn(u64) -> Result<Field> + Sync,
    trials: usize,
) -> Result<StrichartzStats> {
    if trials == 0 {
        return Err(Error::TooFewTrials("trials must be >= 1".into()));
    }
    let gain = setup.gain()?;
    let hs = datum.h_norm(setup.s);
    if hs == 0.0 {
        return Err(Error::InvalidArgument("zero datum".into()));
    }
    let reg = setup.s + gain;
    let values: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| draws(t).and_then(|g| grid_besov_value(&g, setup, reg)).ok())
        .collect();
    Ok(summarize(&values, hs, gain, setup.s))
}

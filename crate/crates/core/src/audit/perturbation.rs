use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicBand;
use crate::dynamics::{solve_forced, ForcingTerm, RegularizedNonlinearity, Trajectory};
use crate::error::{Error, Result};
use crate::field::{lp_of_moduli, Field};
use crate::norms::{spacetime_norm, v_pair, NormName, NormSpec};

/// Solver and norm settings shared by every run of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSetup {
    pub interval: (f64, f64),
    pub dt: f64,
    pub stride: usize,
    pub d_param: f64,
    pub reg: RegularizedNonlinearity,
    /// Ceiling on the base run's `Ẇ` norm.
    pub smallness: f64,
}

/// Per-block interpolation of the `X`-type norm between the `V` pair and `L^∞_t L²_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub r_mid: f64,
    /// `(N, lhs_N, rhs_N)` with `lhs_N = ‖P_N w‖_{L^{d+2}_t L^{r_mid}_x}` and
    /// `rhs_N = ‖P_N w‖_V^{2/(d-2)} ‖P_N w‖_{∞,2}^{(d-4)/(d-2)}`.
    pub blocks: Vec<(f64, f64, f64)>,
    /// `(Σ N² lhs_N²)^{1/2}`.
    pub lhs: f64,
    /// `(Σ N² V_N²)^{1/(d-2)} (Σ N² ‖P_N w‖²_{∞,2})^{(d-4)/(2(d-2))}`.
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRun {
    pub eps: f64,
    pub dist_wdot: f64,
    pub dist_x: f64,
    pub interpolation: InterpolationCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub base_wdot: f64,
    pub runs: Vec<PerturbationRun>,
}

impl PerturbationReport {
    /// Distances ordered by decreasing `ε` are strictly decreasing, and vanish at `ε = 0`.
    pub fn monotone(&self) -> bool {
        let mut runs: Vec<&PerturbationRun> = self.runs.iter().collect();
        runs.sort_by(|a, b| b.eps.abs().total_cmp(&a.eps.abs()));
        let zero_ok = runs.iter().filter(|r| r.eps == 0.0).all(|r| r.dist_wdot == 0.0 && r.dist_x == 0.0);
        zero_ok && runs.windows(2).all(|w| w[1].dist_wdot < w[0].dist_wdot || w[1].eps == w[0].eps)
    }

    pub fn interpolation_holds(&self) -> bool {
        self.runs.iter().all(|r| r.interpolation.holds)
    }
}

/// Spatial exponent between the `V` pair and `L²` at time exponent `d+2`.
pub fn interpolation_exponent(d: f64) -> f64 {
    2.0 * d * (d + 2.0) / (d * d + 2.0 * d - 4.0)
}

fn time_lq(values: &[f64], times: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    let acc: f64 = values
        .windows(2)
        .zip(times.windows(2))
        .map(|(v, t)| 0.5 * (t[1] - t[0]) * (v[0].powf(q) + v[1].powf(q)))
        .sum();
    acc.powf(1.0 / q)
}

pub fn interpolation_check(w: &Trajectory, d: f64) -> Result<InterpolationCheck> {
    if d <= 4.0 {
        return Err(Error::Constraint(format!("interpolation degenerates at d = {d}")));
    }
    let (vq, vr) = v_pair(d);
    let r_mid = interpolation_exponent(d);
    let theta = 2.0 / (d - 2.0);
    let grid = *w.grid();
    let cell = grid.cell_volume();
    let band = DyadicBand::for_grid(&grid);
    let times = w.times();
    let mut blocks = Vec::new();
    let (mut lhs2, mut v2, mut h2) = (0.0, 0.0, 0.0);
    for m in band.frequencies() {
        let table = band.table(&grid, m);
        let (mut mid, mut vv, mut l2) = (Vec::new(), Vec::new(), Vec::new());
        for s in w.states() {
            let pf = s.apply_table(&table);
            let moduli = || pf.values().iter().map(|z| z.norm());
            mid.push(lp_of_moduli(moduli(), r_mid, cell));
            vv.push(lp_of_moduli(moduli(), vr, cell));
            l2.push(lp_of_moduli(moduli(), 2.0, cell));
        }
        let lhs_n = time_lq(&mid, times, d + 2.0);
        let v_n = time_lq(&vv, times, vq);
        let h_n = time_lq(&l2, times, f64::INFINITY);
        let rhs_n = v_n.powf(theta) * h_n.powf(1.0 - theta);
        blocks.push((m, lhs_n, rhs_n));
        lhs2 += m * m * lhs_n * lhs_n;
        v2 += m * m * v_n * v_n;
        h2 += m * m * h_n * h_n;
    }
    let lhs = lhs2.sqrt();
    let rhs = v2.powf(1.0 / (d - 2.0)) * h2.powf((d - 4.0) / (2.0 * (d - 2.0)));
    let tol = 1e-10;
    let holds = blocks.iter().all(|&(_, l, r)| l <= r * (1.0 + tol) + 1e-300) && lhs <= rhs * (1.0 + tol) + 1e-300;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(InterpolationCheck { r_mid, blocks, lhs, rhs, ratio, holds })
}

/// Compares `v_ε`, forced by `ε F`, against the unforced solution `u` with the same data.
pub fn perturbation_experiment(
    v0: &Field,
    forcing_datum: &Field,
    eps: &[f64],
    setup: &PerturbationSetup,
) -> Result<PerturbationReport> {
    let d = setup.d_param;
    let wdot = NormSpec::named(NormName::Wdot, d, 0.5)?;
    let x = NormSpec::named(NormName::X, d, 0.5)?;
    let zero = ForcingTerm::zero(*v0.grid());
    let base = solve_forced(v0, &zero, &setup.reg, setup.interval, setup.dt, setup.stride)?;
    let base_wdot = spacetime_norm(&base, &wdot);
    if base_wdot > setup.smallness {
        return Err(Error::Smallness(format!(
            "base run has Ẇ norm {base_wdot:.6e} > {:.3e}",
            setup.smallness
        )));
    }
    let forcing = ForcingTerm::untruncated(forcing_datum, "perturbation");
    let runs = eps
        .iter()
        .map(|&e| {
            let f = forcing.scaled(e);
            let run = solve_forced(v0, &f, &setup.reg, setup.interval, setup.dt, setup.stride)?;
            let diff = run.try_sub(&base)?;
            Ok(PerturbationRun {
                eps: e,
                dist_wdot: spacetime_norm(&diff, &wdot),
                dist_x: spacetime_norm(&diff, &x),
                interpolation: interpolation_check(&diff, d)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerturbationReport { base_wdot, runs })
}

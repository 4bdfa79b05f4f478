use num_complex::Complex64;

use super::forcing::ForcingTerm;
use super::nonlinearity::RegularizedNonlinearity;
use super::trajectory::{Trajectory, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::fft::dft_in_place;
use crate::field::Field;
use crate::grid::Grid;

/// Largest admissible nonlinear phase per step.
pub const MAX_PHASE: f64 = 0.1;

/// Strang propagator for `i u_t + Δu = g_n(u)` on raw FFT-ordered samples.
struct Stepper<'a> {
    grid: Grid,
    reg: &'a RegularizedNonlinearity,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    scale: f64,
}

impl<'a> Stepper<'a> {
    fn new(grid: Grid, reg: &'a RegularizedNonlinearity, dt: f64) -> Self {
        let norms = grid.frequency_norms_sq();
        let half = norms.iter().map(|k| Complex64::from_polar(1.0, -0.5 * dt * k)).collect();
        let full = norms.iter().map(|k| Complex64::from_polar(1.0, -dt * k)).collect();
        Stepper {
            grid,
            reg,
            dt,
            half,
            full,
            scale: 1.0 / grid.len() as f64,
        }
    }

    fn multiply(spec: &mut [Complex64], m: &[Complex64]) {
        for (s, m) in spec.iter_mut().zip(m) {
            *s *= m;
        }
    }

    fn to_physical(&self, spec: &mut [Complex64]) {
        dft_in_place(&self.grid, spec, false);
        for s in spec.iter_mut() {
            *s *= self.scale;
        }
    }

    fn nonlinear(&self, u: &mut [Complex64]) -> Result<()> {
        let rate = self.reg.max_rate(u);
        let phase = rate * self.dt.abs();
        if phase > MAX_PHASE {
            return Err(Error::PhaseCondition {
                phase,
                suggested_dt: 0.9 * MAX_PHASE / rate,
            });
        }
        if self.reg.strength == 0.0 {
            return Ok(());
        }
        for z in u.iter_mut() {
            let w = self.reg.strength * self.reg.dphi(z.norm_sqr());
            *z *= Complex64::from_polar(1.0, -w * self.dt);
        }
        Ok(())
    }

    /// Advances `nsteps` steps from physical samples `u`, calling `snap(step, u)` at every
    /// `stride`-th step boundary (including step 0).
    fn run(&self, u: &mut Vec<Complex64>, nsteps: usize, stride: usize, mut snap: impl FnMut(usize, &[Complex64])) -> Result<()> {
        snap(0, u);
        dft_in_place(&self.grid, u, true);
        Self::multiply(u, &self.half);
        let mut scratch = vec![Complex64::default(); u.len()];
        for step in 1..=nsteps {
            self.to_physical(u);
            self.nonlinear(u)?;
            dft_in_place(&self.grid, u, true);
            let boundary = step % stride == 0 || step == nsteps;
            if boundary {
                Self::multiply(u, &self.half);
                scratch.copy_from_slice(u);
                self.to_physical(&mut scratch);
                snap(step, &scratch);
                if step < nsteps {
                    Self::multiply(u, &self.half);
                }
            } else {
                Self::multiply(u, &self.full);
            }
        }
        u.copy_from_slice(&scratch);
        Ok(())
    }
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !t0.is_finite() || !t1.is_finite() || t0 == t1 {
        return Err(Error::InvalidArgument(format!("degenerate interval [{t0}, {t1}]")));
    }
    Ok((((t1 - t0).abs() / dt).round() as usize).max(1))
}

/// Evolves `u` from `t0` to `t1` (either direction) and returns `u(t1)`.
///
/// `dt` is adjusted so that a whole number of steps fits the interval.
pub fn evolve(u0: &Field, reg: &RegularizedNonlinearity, t0: f64, t1: f64, dt: f64) -> Result<Field> {
    let nsteps = step_count(t0, t1, dt)?;
    let h = (t1 - t0) / nsteps as f64;
    let stepper = Stepper::new(*u0.grid(), reg, h);
    let mut u = u0.values().to_vec();
    stepper.run(&mut u, nsteps, nsteps, |_, _| {})?;
    Field::new(*u0.grid(), u)
}

/// Solves `i v_t + Δv = g_n(v + F_n)` on `interval` with `v(t0) = v0`.
///
/// Internally evolves `u = v + F_n` and subtracts the exactly evaluated forcing at each
/// snapshot. Snapshots are kept every `stride` steps; the step count must be a multiple of it.
pub fn solve_forced(
    v0: &Field,
    forcing: &ForcingTerm,
    reg: &RegularizedNonlinearity,
    interval: (f64, f64),
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    let (t0, t1) = interval;
    if t1 <= t0 {
        return Err(Error::InvalidArgument(format!("interval [{t0}, {t1}] must be increasing")));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    if forcing.grid() != v0.grid() {
        return Err(Error::GridMismatch("forcing and initial state".into()));
    }
    let nsteps = step_count(t0, t1, dt)?;
    if nsteps % stride != 0 {
        return Err(Error::InvalidArgument(format!(
            "{nsteps} steps are not a multiple of the snapshot stride {stride}"
        )));
    }
    let h = (t1 - t0) / nsteps as f64;
    let grid = *v0.grid();
    let stepper = Stepper::new(grid, reg, h);
    let mut u = v0.try_add(&forcing.evaluate(t0))?.into_values();
    let mut times = Vec::with_capacity(nsteps / stride + 1);
    let mut raw = Vec::with_capacity(nsteps / stride + 1);
    stepper.run(&mut u, nsteps, stride, |step, s| {
        times.push(if step == nsteps { t1 } else { t0 + step as f64 * h });
        raw.push(s.to_vec());
    })?;
    let states = times
        .iter()
        .zip(raw)
        .map(|(t, s)| {
            let u = Field::new(grid, s)?;
            if forcing.is_zero() {
                Ok(u)
            } else {
                u.try_sub(&forcing.evaluate(*t))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = TrajectoryMeta {
        method: "strang".into(),
        level: Some(reg.n),
        exponent: Some(reg.p),
        forcing: forcing.label().to_string(),
        stride,
        adaptive: false,
    };
    Trajectory::new(times, states, h, meta)
}

#[cfg(test)]
mod tests {
    use super::super::forcing::free_propagate;
    use super::*;

    fn smooth(grid: Grid, amp: f64) -> Field {
        Field::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            Complex64::new(amp * (-r2).exp(), 0.5 * amp * x[0] * (-r2).exp())
        })
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(2, 8.0, 16).unwrap();
        let reg = RegularizedNonlinearity::new(2, 3.0).unwrap();
        let t = solve_forced(&Field::zeros(g), &ForcingTerm::zero(g), &reg, (0.0, 0.1), 0.01, 2).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.states().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn linear_flow_matches_propagator() {
        let g = Grid::new(1, 2.0 * std::f64::consts::PI, 32).unwrap();
        let v0 = Field::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let reg = RegularizedNonlinearity::new(1, 3.0).unwrap().with_strength(0.0);
        let t = solve_forced(&v0, &ForcingTerm::zero(g), &reg, (0.0, 0.5), 0.01, 10).unwrap();
        for (time, s) in t.times().iter().zip(t.states()) {
            assert!(s.relative_l2_error(&free_propagate(&v0, *time)) < 1e-12);
        }
    }

    #[test]
    fn forced_linear_state_is_unchanged_initial_profile() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let v0 = smooth(g, 0.5);
        let datum = Field::from_fn(g, |x| Complex64::new((-(x[0] - 1.0).powi(2)).exp(), 0.0));
        let reg = RegularizedNonlinearity::new(1, 3.0).unwrap().with_strength(0.0);
        let force = ForcingTerm::new(&datum, 4, "bump");
        let t = solve_forced(&v0, &force, &reg, (0.0, 0.2), 0.01, 5).unwrap();
        assert!(t.last().relative_l2_error(&free_propagate(&v0, 0.2)) < 1e-12);
    }

    #[test]
    fn phase_condition_reports_dt() {
        let g = Grid::new(1, 10.0, 32).unwrap();
        let v0 = smooth(g, 5.0);
        let reg = RegularizedNonlinearity::new(8, 5.0).unwrap();
        match solve_forced(&v0, &ForcingTerm::zero(g), &reg, (0.0, 1.0), 0.1, 1) {
            Err(Error::PhaseCondition { phase, suggested_dt }) => {
                assert!(phase > MAX_PHASE);
                assert!(suggested_dt < 0.1);
                assert!(solve_forced(&v0, &ForcingTerm::zero(g), &reg, (0.0, 0.01), suggested_dt, 1).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reversible() {
        let g = Grid::new(2, 8.0, 32).unwrap();
        let v0 = smooth(g, 1.5);
        let reg = RegularizedNonlinearity::new(4, 7.0 / 3.0).unwrap();
        let fwd = evolve(&v0, &reg, 0.0, 0.5, 1e-3).unwrap();
        let back = evolve(&fwd, &reg, 0.5, 0.0, 1e-3).unwrap();
        assert!(back.relative_l2_error(&v0) < 1e-9);
    }

    #[test]
    fn second_order_in_dt() {
        let g = Grid::new(1, 16.0, 128).unwrap();
        let v0 = smooth(g, 1.2);
        let reg = RegularizedNonlinearity::new(4, 3.0).unwrap();
        let reference = evolve(&v0, &reg, 0.0, 0.5, 0.5 / 2560.0).unwrap();
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|n| evolve(&v0, &reg, 0.0, 0.5, 0.5 / *n as f64).unwrap().relative_l2_error(&reference))
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 2.0).abs() < 0.2, "{errs:?}");
        }
    }

    #[test]
    fn stride_must_divide_steps() {
        let g = Grid::new(1, 10.0, 16).unwrap();
        let reg = RegularizedNonlinearity::new(1, 3.0).unwrap();
        assert!(solve_forced(&Field::zeros(g), &ForcingTerm::zero(g), &reg, (0.0, 1.0), 0.1, 3).is_err());
        assert!(solve_forced(&Field::zeros(g), &ForcingTerm::zero(g), &reg, (1.0, 0.0), 0.1, 1).is_err());
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ForcingTerm, RegularizedNonlinearity, Trajectory};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::norms::energy_n;
use crate::quadrature::{simpson_weights, trapezoid_weights};

/// Term-by-term evaluation of the energy increment identity
///
/// `(p+1)(E_n(v(T₂)) - E_n(v(T₁))) = boundary + forcing + defect`
///
/// with the three right-hand terms stored without the `1/(p+1)` factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub interval: (f64, f64),
    pub lhs: f64,
    /// `[∫|v|²φ'(|v|²) + |F|²φ'(|F|²) - |F+v|²φ'(|F+v|²)]_{T₁}^{T₂}`.
    pub term_boundary: f64,
    /// `2 Re∫∫ ∂_t F̄ [g_n(F+v) + (F+v)|F+v|²φ''(|F+v|²) - g_n(F) - F|F|²φ''(|F|²)]`.
    pub term_forcing: f64,
    /// `Re∫∫ ∂_t v̄ [v e_n(v) - (F+v) e_n(F+v)]`.
    pub term_en: f64,
    pub p: f64,
    /// `lhs - (term_boundary + term_forcing + term_en)/(p+1)`.
    pub residual: f64,
}

impl IncrementReport {
    /// Residual under an alternative weight `c` on the defect term.
    pub fn residual_with_defect_weight(&self, c: f64) -> f64 {
        self.lhs - (self.term_boundary + self.term_forcing) / (self.p + 1.0) - c * self.term_en
    }
}

fn space_integral(grid_cell: f64, values: impl Iterator<Item = f64>) -> f64 {
    values.sum::<f64>() * grid_cell
}

fn boundary_density(reg: &RegularizedNonlinearity, z: Complex64) -> f64 {
    let x = z.norm_sqr();
    x * reg.dphi(x)
}

/// `∂_t v = iΔv - i g_n(F + v)`.
pub fn time_derivative(v: &Field, u: &Field, reg: &RegularizedNonlinearity) -> Result<Field> {
    let lap = v.laplacian();
    let g = u.map(|z| reg.g_n(z));
    let i = Complex64::i();
    let values = lap.values().iter().zip(g.values()).map(|(l, g)| i * (l - g)).collect();
    Field::new(*v.grid(), values)
}

/// Per-point samples at one snapshot of the integrands that jump when a modulus
/// crosses the saturation point, split by branch.
struct BranchSamples {
    /// `(|z|², d/dt |z|²)` for `z = u, v, F`.
    x_u: Vec<(f64, f64)>,
    x_v: Vec<(f64, f64)>,
    x_f: Vec<(f64, f64)>,
    /// `2 Re(∂_t F̄ u) · xφ''(x_u)` on the power branch.
    forcing_u: Vec<f64>,
    /// `-2 Re(∂_t F̄ F) · xφ''(x_F)` on the power branch.
    forcing_f: Vec<f64>,
    /// `-Re(∂_t v̄ u) · e_n` on the saturated branch.
    en_u: Vec<f64>,
    /// `Re(∂_t v̄ v) · e_n` on the saturated branch.
    en_v: Vec<f64>,
}

const PROBES: usize = 8;

/// Cubic Hermite interpolant of `x` on the unit step.
fn hermite(x0: (f64, f64), x1: (f64, f64), h: f64, th: f64) -> f64 {
    let (t2, t3) = (th * th, th * th * th);
    (2.0 * t3 - 3.0 * t2 + 1.0) * x0.0
        + (t3 - 2.0 * t2 + th) * h * x0.1
        + (-2.0 * t3 + 3.0 * t2) * x1.0
        + (t3 - t2) * h * x1.1
}

/// `∫ f` over one step for a per-point integrand that is smooth on each side of `x = c`
/// and vanishes on the branch other than `sat_branch`.
///
/// Crossings are located on the Hermite interpolant of `x`; the integrand is
/// interpolated linearly between the snapshot values of its own branch formula.
fn split_step(x0: (f64, f64), x1: (f64, f64), c: f64, v0: f64, v1: f64, sat_branch: bool, h: f64) -> f64 {
    let q = |th: f64| hermite(x0, x1, h, th) - c;
    let side = |val: f64| (val >= 0.0) == sat_branch;
    let probes: Vec<f64> = (0..=PROBES).map(|k| q(k as f64 / PROBES as f64)).collect();
    let uniform = probes.iter().all(|&v| (v >= 0.0) == (probes[0] >= 0.0));
    if uniform {
        return if side(probes[0]) { 0.5 * h * (v0 + v1) } else { 0.0 };
    }
    let mut cuts = vec![0.0];
    for k in 0..PROBES {
        let (pa, pb) = (probes[k], probes[k + 1]);
        if (pa >= 0.0) != (pb >= 0.0) {
            let (mut lo, mut hi) = (k as f64 / PROBES as f64, (k + 1) as f64 / PROBES as f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (q(mid) >= 0.0) == (pa >= 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
    }
    cuts.push(1.0);
    let val = |th: f64| v0 + th * (v1 - v0);
    cuts.windows(2)
        .filter(|w| side(q(0.5 * (w[0] + w[1]))))
        .map(|w| 0.5 * h * (w[1] - w[0]) * (val(w[0]) + val(w[1])))
        .sum()
}

pub fn increment_decomposition(
    traj: &Trajectory,
    forcing: &ForcingTerm,
    reg: &RegularizedNonlinearity,
    t1: f64,
    t2: f64,
) -> Result<IncrementReport> {
    let (i1, i2) = match (traj.index_of(t1), traj.index_of(t2)) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => return Err(Error::IntervalNotCovered { t1, t2 }),
    };
    let n = i2 - i1 + 1;
    let h = traj.spacing();
    let weights = if n >= 3 { simpson_weights(n, h)? } else { trapezoid_weights(n, h) };
    let cell = traj.grid().cell_volume();
    let s = reg.strength;
    let c = reg.saturation_point();
    let a = 0.5 * (reg.p - 1.0);
    let e_sat = (reg.p - 1.0) * reg.saturation_value();

    let boundary_at = |i: usize| -> Result<f64> {
        let v = traj.state(i);
        let f = forcing.evaluate(traj.times()[i]);
        Ok(s * space_integral(
            cell,
            v.values().iter().zip(f.values()).map(|(v, f)| {
                boundary_density(reg, *v) + boundary_density(reg, *f) - boundary_density(reg, v + f)
            }),
        ))
    };

    let samples_at = |k: usize| -> Result<(f64, BranchSamples)> {
        let t = traj.times()[k];
        let v = traj.state(k);
        let f = forcing.evaluate(t);
        let u = v.try_add(&f)?;
        let dv = time_derivative(v, &u, reg)?;
        let df = forcing.time_derivative(t);
        let len = v.values().len();
        let mut smooth = 0.0;
        let mut b = BranchSamples {
            x_u: Vec::with_capacity(len),
            x_v: Vec::with_capacity(len),
            x_f: Vec::with_capacity(len),
            forcing_u: Vec::with_capacity(len),
            forcing_f: Vec::with_capacity(len),
            en_u: Vec::with_capacity(len),
            en_v: Vec::with_capacity(len),
        };
        for idx in 0..len {
            let (vz, fz, uz) = (v.values()[idx], f.values()[idx], u.values()[idx]);
            let (dvz, dfz) = (dv.values()[idx].conj(), df.values()[idx].conj());
            let (xu, xv, xf) = (uz.norm_sqr(), vz.norm_sqr(), fz.norm_sqr());
            let rate = |z: Complex64, dz_conj: Complex64| 2.0 * (dz_conj * z).re;
            smooth += 2.0 * (dfz * (reg.g_n(uz) - reg.g_n(fz))).re;
            b.x_u.push((xu, rate(uz, dvz + dfz)));
            b.x_v.push((xv, rate(vz, dvz)));
            b.x_f.push((xf, rate(fz, dfz)));
            b.forcing_u.push(2.0 * s * (dfz * uz).re * a * xu.powf(a));
            b.forcing_f.push(-2.0 * s * (dfz * fz).re * a * xf.powf(a));
            b.en_u.push(-s * (dvz * uz).re * e_sat);
            b.en_v.push(s * (dvz * vz).re * e_sat);
        }
        Ok((smooth * cell, b))
    };

    let mut term_forcing = 0.0;
    let mut term_en = 0.0;
    let mut prev: Option<BranchSamples> = None;
    for (k, w) in (i1..=i2).zip(&weights) {
        let (smooth, cur) = samples_at(k)?;
        term_forcing += w * smooth;
        if let Some(p) = prev.take() {
            let mut acc_f = 0.0;
            let mut acc_e = 0.0;
            for j in 0..cur.x_u.len() {
                acc_f += split_step(p.x_u[j], cur.x_u[j], c, p.forcing_u[j], cur.forcing_u[j], false, h);
                acc_f += split_step(p.x_f[j], cur.x_f[j], c, p.forcing_f[j], cur.forcing_f[j], false, h);
                acc_e += split_step(p.x_u[j], cur.x_u[j], c, p.en_u[j], cur.en_u[j], true, h);
                acc_e += split_step(p.x_v[j], cur.x_v[j], c, p.en_v[j], cur.en_v[j], true, h);
            }
            term_forcing += acc_f * cell;
            term_en += acc_e * cell;
        }
        prev = Some(cur);
    }
    let lhs = energy_n(traj.state(i2), reg) - energy_n(traj.state(i1), reg);
    let term_boundary = boundary_at(i2)? - boundary_at(i1)?;
    let p = reg.p;
    Ok(IncrementReport {
        interval: (traj.times()[i1], traj.times()[i2]),
        lhs,
        term_boundary,
        term_forcing,
        term_en,
        p,
        residual: lhs - (term_boundary + term_forcing + term_en) / (p + 1.0),
    })
}

/// Least-squares slope of `log|residual|` against `log dt`.
pub fn convergence_slope(dts: &[f64], residuals: &[f64]) -> Result<f64> {
    if dts.len() != residuals.len() || dts.len() < 2 {
        return Err(Error::InvalidArgument("slope needs at least two matched samples".into()));
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.abs().ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument("residuals must be nonzero and finite".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::solve_forced;
    use crate::grid::Grid;

    fn bump(g: Grid, amp: f64, shift: f64) -> Field {
        Field::from_fn(g, |x| {
            let y = x[0] - shift;
            Complex64::new(amp * (-y * y).exp(), 0.4 * amp * y * (-y * y).exp())
        })
    }

    #[test]
    fn unforced_small_amplitude() {
        let g = Grid::new(1, 16.0, 128).unwrap();
        let reg = RegularizedNonlinearity::new(4, 3.0).unwrap();
        let f = ForcingTerm::zero(g);
        let t = solve_forced(&bump(g, 1.0, 0.0), &f, &reg, (0.0, 0.5), 1e-3, 10).unwrap();
        let r = increment_decomposition(&t, &f, &reg, 0.0, 0.5).unwrap();
        assert_eq!(r.term_forcing, 0.0);
        assert_eq!(r.term_en, 0.0);
        assert!(r.residual.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn zero_solution_cancels() {
        let g = Grid::new(1, 16.0, 64).unwrap();
        let reg = RegularizedNonlinearity::new(1, 9.0 / 5.0).unwrap();
        let force = ForcingTerm::untruncated(&bump(g, 3.0, 1.0), "b");
        let states = vec![Field::zeros(g); 9];
        let t = Trajectory::uniform(0.0, 0.4, states).unwrap();
        let r = increment_decomposition(&t, &force, &reg, 0.0, 0.4).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.residual.abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn uncovered_interval() {
        let g = Grid::new(1, 8.0, 16).unwrap();
        let reg = RegularizedNonlinearity::new(1, 3.0).unwrap();
        let t = Trajectory::uniform(0.0, 1.0, vec![Field::zeros(g); 5]).unwrap();
        let f = ForcingTerm::zero(g);
        assert!(matches!(increment_decomposition(&t, &f, &reg, 0.0, 1.3), Err(Error::IntervalNotCovered { .. })));
        assert!(increment_decomposition(&t, &f, &reg, 0.6, 0.2).is_err());
    }

    fn saturating_run(p: f64, dt: f64) -> IncrementReport {
        let g = Grid::new(1, 16.0, 128).unwrap();
        let reg = RegularizedNonlinearity::new(1, p).unwrap();
        let force = ForcingTerm::untruncated(&bump(g, 1.0, 1.5), "b");
        let t = solve_forced(&bump(g, 2.2, -0.5), &force, &reg, (0.0, 0.4), dt, 1).unwrap();
        increment_decomposition(&t, &force, &reg, 0.0, 0.4).unwrap()
    }

    #[test]
    fn second_order_through_saturation() {
        let dts = [4e-4, 2e-4, 1e-4, 5e-5];
        let r: Vec<IncrementReport> = dts.iter().map(|&dt| saturating_run(9.0 / 5.0, dt)).collect();
        assert!(r[0].term_en.abs() > 1e-2);
        let res: Vec<f64> = r.iter().map(|r| r.residual).collect();
        let slope = convergence_slope(&dts, &res).unwrap();
        assert!((slope - 2.0).abs() < 0.3, "{slope} {res:?}");
    }

    #[test]
    fn slope_of_exact_power() {
        let dts = [0.1, 0.05, 0.025];
        let res: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powi(2)).collect();
        assert!((convergence_slope(&dts, &res).unwrap() - 2.0).abs() < 1e-12);
        assert!(convergence_slope(&dts, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn forced_saturating_run_prefers_scaled_defect() {
        let g = Grid::new(1, 16.0, 128).unwrap();
        let p = 3.0;
        let reg = RegularizedNonlinearity::new(1, p).unwrap();
        let force = ForcingTerm::untruncated(&bump(g, 2.0, 1.5), "b");
        let t = solve_forced(&bump(g, 2.5, -0.5), &force, &reg, (0.0, 0.3), 2.5e-4, 1).unwrap();
        let r = increment_decomposition(&t, &force, &reg, 0.0, 0.3).unwrap();
        assert!(r.term_en.abs() > 1e-3, "{r:?}");
        let scaled = r.residual.abs();
        let unscaled = r.residual_with_defect_weight(1.0).abs();
        assert!(scaled < 1e-5 * r.term_en.abs(), "{r:?}");
        assert!(unscaled > 1e3 * scaled);
    }
}

//! Free Schrödinger flow of radial data in `ℝ^d` through a precomputed Fourier–Bessel kernel,
//! with a radial analogue of the many-fold randomization.

use num_complex::Complex64;
use rayon::prelude::*;

use super::strichartz::{summarize, StrichartzSetup, StrichartzStats};
use crate::bessel::bessel_j_unchecked;
use crate::cutoff::{annulus, low_pass};
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, Rule};
use crate::radial::NODES_PER_OSCILLATION;
use crate::randomization::{DrawKey, RandomCoefficientFamily};

const PANEL_ORDER: usize = 16;

/// Surface measure `|S^{d-1}| = 2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// Radial quadrature in physical and frequency variables with the degree-0 transform kernels.
#[derive(Debug, Clone)]
pub struct RadialSpace {
    d: usize,
    r: Rule,
    rho: Rule,
    /// `forward[a * nr + b]`: contribution of `f(r_b)` to `f̂(ρ_a)`.
    forward: Vec<f64>,
    /// `inverse[b * nk + a]`: contribution of `f̂(ρ_a)` to `f(r_b)`.
    inverse: Vec<f64>,
    area: f64,
}

fn rule_for(extent: f64, oscillations: f64) -> Rule {
    let needed = (NODES_PER_OSCILLATION * oscillations).ceil() as usize;
    let panels = needed.div_ceil(PANEL_ORDER).max(4);
    composite_gauss(0.0, extent, panels, PANEL_ORDER)
}

impl RadialSpace {
    pub fn new(d: usize, r_max: f64, rho_max: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} must be at least 2")));
        }
        if !(r_max > 0.0) || !(rho_max > 0.0) {
            return Err(Error::InvalidArgument("radial extents must be positive".into()));
        }
        let osc = r_max * rho_max / (2.0 * std::f64::consts::PI);
        let r = rule_for(r_max, osc);
        let rho = rule_for(rho_max, osc);
        let nu = 0.5 * (d as f64 - 2.0);
        let dh = 0.5 * d as f64;
        let two_pi = 2.0 * std::f64::consts::PI;
        let (nr, nk) = (r.len(), rho.len());
        let kernel: Vec<f64> = (0..nk * nr)
            .into_par_iter()
            .map(|idx| bessel_j_unchecked(nu, rho.nodes[idx / nr] * r.nodes[idx % nr]))
            .collect();
        let mut forward = vec![0.0; nk * nr];
        let mut inverse = vec![0.0; nr * nk];
        for a in 0..nk {
            let ka = rho.nodes[a];
            for b in 0..nr {
                let rb = r.nodes[b];
                let j = kernel[a * nr + b];
                forward[a * nr + b] = two_pi.powf(dh) * ka.powf(-nu) * r.weights[b] * rb.powf(dh) * j;
                inverse[b * nk + a] = two_pi.powf(-dh) * rb.powf(-nu) * rho.weights[a] * ka.powf(dh) * j;
            }
        }
        Ok(RadialSpace { d, r, rho, forward, inverse, area: sphere_area(d) })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r.nodes
    }

    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho.nodes
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        self.r.nodes.iter().map(|&r| Complex64::new(f(r), 0.0)).collect()
    }

    /// `f̂` at the frequency nodes.
    pub fn transform(&self, f: &[Complex64]) -> Vec<Complex64> {
        let nr = self.r.len();
        (0..self.rho.len())
            .into_par_iter()
            .map(|a| self.forward[a * nr..(a + 1) * nr].iter().zip(f).map(|(k, v)| v * k).sum())
            .collect()
    }

    /// `f` at the physical nodes from `f̂`.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let nk = self.rho.len();
        (0..self.r.len())
            .map(|b| self.inverse[b * nk..(b + 1) * nk].iter().zip(spec).map(|(k, v)| v * k).sum())
            .collect()
    }

    /// `‖f‖_{L^p(ℝ^d)}` from physical samples.
    pub fn lp_norm(&self, f: &[Complex64], p: f64) -> f64 {
        let dm = self.d as i32 - 1;
        if p.is_infinite() {
            return f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self
            .r
            .nodes
            .iter()
            .zip(&self.r.weights)
            .zip(f)
            .map(|((r, w), v)| w * r.powi(dm) * v.norm().powf(p))
            .sum();
        (self.area * s).powf(1.0 / p)
    }

    /// `‖f‖_{H^s}` from the spectrum.
    pub fn h_norm(&self, spec: &[Complex64], s: f64) -> f64 {
        let dm = self.d as i32 - 1;
        let sum: f64 = self
            .rho
            .nodes
            .iter()
            .zip(&self.rho.weights)
            .zip(spec)
            .map(|((k, w), v)| w * k.powi(dm) * (1.0 + k * k).powf(s) * v.norm_sqr())
            .sum();
        (self.area * sum / (2.0 * std::f64::consts::PI).powi(self.d as i32)).sqrt()
    }

    /// `‖t^σ e^{itΔ}g‖_{Ḃ^{reg}_{q,p,2}}` over the setup window for a spectrum `ĝ`.
    pub fn besov_value(&self, spec: &[Complex64], setup: &StrichartzSetup, regularity: f64) -> f64 {
        let times = setup.times();
        let h = (setup.window.1 - setup.window.0) / (setup.snapshots - 1) as f64;
        let mut total = 0.0;
        for (m, table) in self.shell_tables() {
            let block: Vec<Complex64> = spec.iter().zip(&table).map(|(v, w)| v * w).collect();
            if block.iter().all(|v| v.norm_sqr() == 0.0) {
                continue;
            }
            let norms: Vec<f64> = times
                .iter()
                .map(|&t| {
                    let evolved: Vec<Complex64> = block
                        .iter()
                        .zip(&self.rho.nodes)
                        .map(|(v, k)| v * Complex64::from_polar(1.0, -t * k * k))
                        .collect();
                    setup.time_weight(t) * self.lp_norm(&self.inverse(&evolved), setup.p)
                })
                .collect();
            let tn = if setup.q.is_infinite() {
                norms.iter().cloned().fold(0.0, f64::max)
            } else {
                let mut acc = 0.0;
                for w in norms.windows(2) {
                    acc += 0.5 * h * (w[0].powf(setup.q) + w[1].powf(setup.q));
                }
                acc.powf(1.0 / setup.q)
            };
            total += m.powf(2.0 * regularity) * tn * tn;
        }
        total.sqrt()
    }

    /// Dyadic shells `N = 2^e` covering `[0, ρ_max]`: low-pass at the lowest, annuli above.
    pub fn shells(&self) -> Vec<(i32, f64)> {
        let top = self.rho.nodes.last().copied().unwrap_or(1.0).log2().ceil() as i32;
        (LOWEST_SHELL..=top.max(LOWEST_SHELL)).map(|e| (e, 2f64.powi(e))).collect()
    }

    fn shell_weight(&self, e: i32, k: f64) -> f64 {
        let m = 2f64.powi(e);
        if e == LOWEST_SHELL {
            low_pass(k / m)
        } else {
            annulus(k, m)
        }
    }

    fn shell_tables(&self) -> Vec<(f64, Vec<f64>)> {
        self.shells()
            .into_iter()
            .map(|(e, m)| (m, self.rho.nodes.iter().map(|&k| self.shell_weight(e, k)).collect()))
            .collect()
    }
}

const LOWEST_SHELL: i32 = -1;

/// Unit-spaced smooth partition of unity on `[0, ∞)`: weight of integer centre `i` at `x`.
pub fn unit_partition(x: f64) -> Vec<(i64, f64)> {
    let b = |y: f64| low_pass(2.0 * y.abs());
    let lo = (x - 1.0).ceil().max(0.0) as i64;
    let hi = (x + 1.0).floor() as i64;
    let raw: Vec<(i64, f64)> = (lo..=hi).map(|i| (i, b(x - i as f64))).filter(|(_, w)| *w > 0.0).collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    raw.into_iter().map(|(i, w)| (i, w / total)).collect()
}

/// Radial pieces `φ_N(ρ) ψ_j(ρ) (ϕ_i f)^(ρ)` with random signs `X_{N,i,j}`.
#[derive(Debug, Clone)]
pub struct RadialRandomization {
    /// Physical centre `i` and the spectrum of `ϕ_i f`.
    localized: Vec<(i64, Vec<Complex64>)>,
    /// Per frequency node: `(shell exponent, unit index, weight)`.
    frequency_weights: Vec<Vec<(i32, i64, f64)>>,
    datum_spectrum: Vec<Complex64>,
}

impl RadialRandomization {
    pub fn new(space: &RadialSpace, datum: &[Complex64]) -> Result<Self> {
        if datum.len() != space.r.len() {
            return Err(Error::InvalidArgument("datum must be sampled on the radial nodes".into()));
        }
        let mut pieces: std::collections::BTreeMap<i64, Vec<Complex64>> = Default::default();
        for (b, r) in space.r.nodes.iter().enumerate() {
            if datum[b].norm_sqr() == 0.0 {
                continue;
            }
            for (i, w) in unit_partition(*r) {
                pieces.entry(i).or_insert_with(|| vec![Complex64::default(); datum.len()])[b] = datum[b] * w;
            }
        }
        let localized = pieces.into_iter().map(|(i, f)| (i, space.transform(&f))).collect();
        let shells = space.shells();
        let frequency_weights = space
            .rho
            .nodes
            .iter()
            .map(|&k| {
                let mut out = Vec::new();
                for &(e, _) in &shells {
                    let sw = space.shell_weight(e, k);
                    if sw == 0.0 {
                        continue;
                    }
                    for (j, uw) in unit_partition(k) {
                        out.push((e, j, sw * uw));
                    }
                }
                out
            })
            .collect();
        Ok(RadialRandomization {
            localized,
            frequency_weights,
            datum_spectrum: space.transform(datum),
        })
    }

    pub fn datum_spectrum(&self) -> &[Complex64] {
        &self.datum_spectrum
    }

    pub fn piece_count(&self) -> usize {
        let pairs: std::collections::BTreeSet<(i32, i64)> =
            self.frequency_weights.iter().flatten().map(|(e, j, _)| (*e, *j)).collect();
        pairs.len() * self.localized.len()
    }

    /// Spectrum of `f^ω` for one trial.
    pub fn sample_spectrum(&self, family: &RandomCoefficientFamily, trial: u64) -> Vec<Complex64> {
        let mut cache: std::collections::HashMap<(i32, i64, i64), f64> = Default::default();
        let mut draw = |e: i32, i: i64, j: i64| {
            *cache.entry((e, i, j)).or_insert_with(|| {
                family.draw(trial, &DrawKey { m_exp: e, i: [i, 0, 0], j: [j, 0, 0], k: 0, l: 0 })
            })
        };
        self.frequency_weights
            .iter()
            .enumerate()
            .map(|(a, ws)| {
                let mut acc = Complex64::default();
                for (i, spec) in &self.localized {
                    let mut coeff = 0.0;
                    for &(e, j, w) in ws {
                        coeff += w * draw(e, *i, j);
                    }
                    acc += spec[a] * coeff;
                }
                acc
            })
            .collect()
    }
}

/// Randomized Strichartz experiment for a radial datum in `ℝ^d`.
pub fn radial_strichartz_experiment(
    space: &RadialSpace,
    datum: &[Complex64],
    setup: &StrichartzSetup,
    family: &RandomCoefficientFamily,
    trials: usize,
) -> Result<StrichartzStats> {
    if trials == 0 {
        return Err(Error::TooFewTrials("trials must be >= 1".into()));
    }
    let gain = setup.gain()?;
    let rand = RadialRandomization::new(space, datum)?;
    let hs = space.h_norm(rand.datum_spectrum(), setup.s);
    if hs == 0.0 {
        return Err(Error::InvalidArgument("zero datum".into()));
    }
    let reg = setup.s + gain;
    let values: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let v = space.besov_value(&rand.sample_spectrum(family, t), setup, reg);
            v.is_finite().then_some(v)
        })
        .collect();
    Ok(summarize(&values, hs, gain, setup.s))
}

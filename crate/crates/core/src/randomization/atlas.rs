//! The many-fold decomposition `f = Σ_{M,i,j,k,l} P_j f^{M,i}_{k,l}`.
//!
//! Pieces are kept spectrally. For a centre `i` with localized samples
//! `w_m = cell · (ϕ_i f)(x_m)`, the plane-wave expansion gives, at every lattice
//! frequency `ξ`,
//!
//! `(ϕ_i f)^(ξ) = Σ_{k,l} (2π)^{d/2} (−i)^k b_{k,l}(ξ̂) Σ_m w_m R_k(|ξ||x_m|) b_{k,l}(x̂_m)`
//!
//! with `R_k(z) = z^{−(d−2)/2} J_{ν(k)}(z)`. The inner sums depend on `ξ` only
//! through `|ξ|`, so they are tabulated once per centre on the distinct lattice
//! radii. Shell `M` multiplies by `ϕ_M` and the unit-scale stage by `ψ_j`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::family::{DrawKey, RandomCoefficientFamily};
use crate::bessel::bessel_j_unchecked;
use crate::dyadic::DyadicBand;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::partition::{cutoff_radius, make_partition, unit_weights};
use crate::quadrature::Rule;
use crate::radial::{bessel_order, i_pow, RadialProfile};
use crate::sphere::{basis_indices, basis_values};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// Highest harmonic degree kept.
    pub k_max: usize,
    /// Unit-scale indices kept: `|j| ≤ j_radius · M + 2√dim`.
    pub j_radius: f64,
    /// Largest acceptable relative reconstruction residual.
    pub tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            k_max: 8,
            j_radius: 4.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
struct ShellPoint {
    flat: usize,
    weight: f64,
    row: usize,
    units: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
struct Shell {
    m: f64,
    m_exp: i32,
    points: Vec<ShellPoint>,
    js: Vec<[i64; 3]>,
}

#[derive(Debug, Clone)]
struct Centre {
    index: [i64; 3],
    /// `(x_m, w_m)` with `x_m` unwrapped next to the centre.
    samples: Vec<([f64; 3], Complex64)>,
    /// `row · nb + b` → `(2π)^{d/2} (−i)^k Σ_m w_m R_k b_{k,l}(x̂_m)`.
    table: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct DecompositionAtlas {
    grid: Grid,
    truncation: Truncation,
    shells: Vec<Shell>,
    centres: Vec<Centre>,
    basis: Vec<(usize, usize)>,
    basis_at: Vec<f64>,
    truncated: Field,
    residual: f64,
}

/// Angular Parseval bookkeeping for one `(M, i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalCheck {
    pub m: f64,
    pub centre: [i64; 3],
    pub k_max: usize,
    pub coefficient_sum: f64,
    pub spectrum_norm_sq: f64,
    pub relative_error: f64,
}

/// One realization `f^ω` of the randomization.
#[derive(Debug, Clone)]
pub struct RandomizedSample {
    pub family: RandomCoefficientFamily,
    pub trial: u64,
    pub field: Field,
}

/// `z^{−(d−2)/2} J_{ν(k)}(z)`, continuous at `z = 0`.
fn radial_kernel(k: usize, d: usize, z: f64) -> f64 {
    let nu = bessel_order(k, d);
    if z == 0.0 {
        return if k == 0 { 1.0 / (2f64.powf(nu) * gamma(nu + 1.0)) } else { 0.0 };
    }
    z.powf(-(d as f64 - 2.0) / 2.0) * bessel_j_unchecked(nu, z)
}

fn unit_vector(x: [f64; 3], dim: usize) -> [f64; 3] {
    let r = (0..dim).map(|a| x[a] * x[a]).sum::<f64>().sqrt();
    if r == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    [x[0] / r, x[1] / r, x[2] / r]
}

fn lattice_sq(v: [i64; 3]) -> u64 {
    v.iter().map(|a| (a * a) as u64).sum()
}

/// Builds the atlas of `f` under `truncation`.
pub fn build_atlas(f: &Field, truncation: Truncation) -> Result<DecompositionAtlas> {
    let grid = *f.grid();
    let dim = grid.dim();
    let partition = make_partition(&grid)?;
    let basis: Vec<(usize, usize)> = if dim == 1 {
        vec![(0, 1)]
    } else {
        basis_indices(dim, truncation.k_max)
    };
    let nb = basis.len();

    // rows: distinct |n|² for dim ≥ 2, the flat index itself for dim 1
    let mut rows = vec![0usize; grid.len()];
    let mut row_keys: Vec<u64> = Vec::new();
    if dim == 1 {
        for (flat, r) in rows.iter_mut().enumerate() {
            *r = flat;
        }
    } else {
        let mut keys: Vec<u64> = (0..grid.len()).map(|fl| lattice_sq(grid.wave_vector(fl))).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for (r, key) in rows.iter_mut().zip(keys.drain(..)) {
            *r = distinct.binary_search(&key).expect("present");
        }
        row_keys = distinct;
    }
    let basis_at: Vec<f64> = if dim == 1 {
        vec![1.0; grid.len()]
    } else {
        (0..grid.len())
            .flat_map(|fl| basis_values(dim, truncation.k_max, unit_vector(grid.frequency(fl), dim)))
            .collect()
    };

    let cell = grid.cell_volume();
    let h = grid.spacing();
    let prefactors: Vec<Complex64> = basis
        .iter()
        .map(|(k, _)| i_pow(-(*k as i64)) * (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0))
        .collect();
    let values = f.values();
    let mut centres = Vec::new();
    for c in 0..partition.centers().len() {
        let index = partition.centers()[c];
        let samples: Vec<([f64; 3], Complex64)> = partition
            .support(c)
            .into_iter()
            .filter(|p| values[p.flat] != Complex64::default())
            .map(|p| {
                let mut x = [0.0; 3];
                for a in 0..dim {
                    x[a] = index[a] as f64 + p.offset[a];
                }
                (x, values[p.flat] * (cell * p.weight))
            })
            .collect();
        if samples.is_empty() {
            continue;
        }
        centres.push(Centre {
            index,
            samples,
            table: Vec::new(),
        });
    }

    // per-centre tables
    let step = 2.0 * std::f64::consts::PI / grid.points() as f64;
    centres.par_iter_mut().for_each(|centre| {
        if dim == 1 {
            let mut spec = vec![Complex64::default(); grid.len()];
            for (flat, s) in spec.iter_mut().enumerate() {
                let xi = grid.frequency(flat)[0];
                *s = centre
                    .samples
                    .iter()
                    .map(|(x, w)| w * Complex64::from_polar(1.0, -xi * x[0]))
                    .sum();
            }
            centre.table = spec;
            return;
        }
        let sample_keys: Vec<u64> = centre
            .samples
            .iter()
            .map(|(x, _)| {
                let mut q = [0i64; 3];
                for a in 0..dim {
                    q[a] = (x[a] / h).round() as i64;
                }
                lattice_sq(q)
            })
            .collect();
        let sample_basis: Vec<Vec<f64>> = centre
            .samples
            .iter()
            .map(|(x, _)| basis_values(dim, truncation.k_max, unit_vector(*x, dim)))
            .collect();
        let mut cache: HashMap<(usize, u64), f64> = HashMap::new();
        let mut table = vec![Complex64::default(); row_keys.len() * nb];
        for (row, &a) in row_keys.iter().enumerate() {
            for ((&b, (_, w)), sb) in sample_keys.iter().zip(&centre.samples).zip(&sample_basis) {
                let mut last_k = usize::MAX;
                let mut kernel = 0.0;
                for (bi, (k, _)) in basis.iter().enumerate() {
                    if *k != last_k {
                        last_k = *k;
                        // z = |ξ||x| = (2π/L)√a · h√b = (2π/N)√(ab)
                        kernel = *cache
                            .entry((*k, a * b))
                            .or_insert_with(|| radial_kernel(*k, dim, step * ((a * b) as f64).sqrt()));
                    }
                    table[row * nb + bi] += w * (kernel * sb[bi]);
                }
            }
            for (bi, pre) in prefactors.iter().enumerate() {
                table[row * nb + bi] *= pre;
            }
        }
        centre.table = table;
    });

    let band = DyadicBand::for_grid(&grid);
    let reach = 2.0 * cutoff_radius(dim);
    let shells: Vec<Shell> = band
        .frequencies()
        .into_iter()
        .map(|m| {
            let limit = truncation.j_radius * m + reach;
            let mut js: Vec<[i64; 3]> = Vec::new();
            let mut raw = Vec::new();
            for flat in 0..grid.len() {
                let xi = grid.frequency(flat);
                let r = (0..dim).map(|a| xi[a] * xi[a]).sum::<f64>().sqrt();
                let weight = band.multiplier(m, r);
                if weight == 0.0 {
                    continue;
                }
                let units: Vec<([i64; 3], f64)> = unit_weights(dim, xi)
                    .into_iter()
                    .filter(|(j, _)| (lattice_sq(*j) as f64).sqrt() <= limit)
                    .collect();
                js.extend(units.iter().map(|(j, _)| *j));
                raw.push((flat, weight, units));
            }
            js.sort_unstable();
            js.dedup();
            let points = raw
                .into_iter()
                .map(|(flat, weight, units)| ShellPoint {
                    flat,
                    weight,
                    row: rows[flat],
                    units: units
                        .into_iter()
                        .map(|(j, w)| (js.binary_search(&j).expect("collected") as u32, w))
                        .collect(),
                })
                .collect();
            Shell {
                m,
                m_exp: m.log2().round() as i32,
                points,
                js,
            }
        })
        .collect();

    let mut atlas = DecompositionAtlas {
        grid,
        truncation,
        shells,
        centres,
        basis,
        basis_at,
        truncated: Field::zeros(grid),
        residual: 0.0,
    };
    atlas.truncated = atlas.assemble(|_| 1.0);
    atlas.residual = if f.is_zero() {
        0.0
    } else {
        atlas.truncated.relative_l2_error(f)
    };
    if atlas.residual > truncation.tolerance {
        return Err(Error::TruncationResidual {
            residual: atlas.residual,
            tolerance: truncation.tolerance,
        });
    }
    Ok(atlas)
}

impl DecompositionAtlas {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    /// Relative `L²` distance between the sum of all pieces and the datum.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Sum of all pieces.
    pub fn truncated(&self) -> &Field {
        &self.truncated
    }

    pub fn is_empty(&self) -> bool {
        self.centres.is_empty()
    }

    /// Dyadic frequencies of the shells.
    pub fn shells(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.m).collect()
    }

    /// Centres `i` whose localized datum is nonzero.
    pub fn centres(&self) -> Vec<[i64; 3]> {
        self.centres.iter().map(|c| c.index).collect()
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    /// Number of indices `(M, i, j, k, l)`.
    pub fn piece_count(&self) -> usize {
        self.shells.iter().map(|s| s.js.len()).sum::<usize>() * self.centres.len() * self.basis.len()
    }

    /// `a_k = (2π)^{−d/2} i^k`.
    pub fn a_k(&self, k: usize) -> Complex64 {
        i_pow(k as i64) * (2.0 * std::f64::consts::PI).powf(-(self.grid.dim() as f64) / 2.0)
    }

    fn coefficient_at(&self, centre: &Centre, b: usize, p: &ShellPoint) -> Complex64 {
        let nb = self.basis.len();
        centre.table[p.row * nb + b] * (p.weight * self.basis_at[p.flat * nb + b])
    }

    /// `f^ω` for an arbitrary coefficient assignment.
    pub fn assemble(&self, draw: impl Fn(&DrawKey) -> f64 + Sync) -> Field {
        self.assemble_rows(|m_exp, i, k, l, js, xs| {
            for (x, j) in xs.iter_mut().zip(js) {
                *x = draw(&DrawKey { m_exp, i, j: *j, k, l });
            }
        })
    }

    /// Same as `assemble`, with the draws of one `(M, i, k, l)` row filled in a single call.
    fn assemble_rows(&self, fill: impl Fn(i32, [i64; 3], usize, usize, &[[i64; 3]], &mut [f64]) + Sync) -> Field {
        let nb = self.basis.len();
        let groups: Vec<(usize, usize)> = (0..self.shells.len())
            .flat_map(|s| (0..self.centres.len()).map(move |c| (s, c)))
            .collect();
        let partials: Vec<Vec<Complex64>> = groups
            .par_iter()
            .map(|&(s, c)| {
                let shell = &self.shells[s];
                let centre = &self.centres[c];
                let nj = shell.js.len();
                // draws laid out as [j][b] so each point reduces over b contiguously
                let mut xs = vec![0.0; nj];
                let mut table = vec![0.0; nj * nb];
                for b in 0..nb {
                    let (k, l) = self.basis[b];
                    fill(shell.m_exp, centre.index, k, l, &shell.js, &mut xs);
                    for (ji, x) in xs.iter().enumerate() {
                        table[ji * nb + b] = *x;
                    }
                }
                let mut coeffs = vec![Complex64::default(); nb];
                let mut out = vec![Complex64::default(); shell.points.len()];
                for (o, p) in out.iter_mut().zip(&shell.points) {
                    for (b, c) in coeffs.iter_mut().enumerate() {
                        *c = self.coefficient_at(centre, b, p);
                    }
                    for &(ji, w) in &p.units {
                        let row = &table[ji as usize * nb..(ji as usize + 1) * nb];
                        let s = coeffs.iter().zip(row).fold(Complex64::default(), |acc, (c, x)| acc + c * x);
                        *o += s * w;
                    }
                }
                out
            })
            .collect();
        let mut spectral = vec![Complex64::default(); self.grid.len()];
        for ((s, _), part) in groups.iter().zip(&partials) {
            for (p, v) in self.shells[*s].points.iter().zip(part) {
                spectral[p.flat] += v;
            }
        }
        Field::from_spectral(self.grid, spectral).expect("grid-sized spectrum")
    }

    /// The single piece `P_j f^{M,i}_{k,l}`; zero when the index is not in the atlas.
    pub fn piece(&self, key: &DrawKey) -> Field {
        self.assemble(|k| if k == key { 1.0 } else { 0.0 })
    }

    /// `Σ_{M,i,j,k,l} ‖P_j f^{M,i}_{k,l}‖₂²`.
    pub fn piece_norm_sq_sum(&self) -> f64 {
        let nb = self.basis.len();
        let mut total = 0.0;
        for shell in &self.shells {
            for centre in &self.centres {
                for b in 0..nb {
                    for p in &shell.points {
                        let c = self.coefficient_at(centre, b, p).norm_sqr();
                        total += c * p.units.iter().map(|(_, w)| w * w).sum::<f64>();
                    }
                }
            }
        }
        total / self.grid.volume()
    }

    fn lookup(&self, m: f64, centre: [i64; 3]) -> Result<(&Shell, &Centre)> {
        let shell = self
            .shells
            .iter()
            .find(|s| s.m == m)
            .ok_or_else(|| Error::InvalidArgument(format!("no shell at M = {m}")))?;
        let centre = self
            .centres
            .iter()
            .find(|c| c.index == centre)
            .ok_or_else(|| Error::InvalidArgument(format!("no piece at centre {centre:?}")))?;
        Ok((shell, centre))
    }

    /// `ĉ^{M,i}_{k,l}(ρ)` in unit-rescaled frequency on the nodes of `rule`.
    pub fn coefficient(&self, m: f64, centre: [i64; 3], k: usize, l: usize, rule: &Rule) -> Result<RadialProfile> {
        let dim = self.grid.dim();
        if dim == 1 {
            return Err(Error::InvalidArgument("dimension 1 atlases carry no angular coefficients".into()));
        }
        let (_, centre) = self.lookup(m, centre)?;
        let band = DyadicBand::for_grid(&self.grid);
        let pre = i_pow(-(k as i64)) * (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0) * m.powi(dim as i32);
        let offset: usize = basis_indices(dim, k).len() - crate::sphere::basis_count(dim, k) + l - 1;
        let sample_basis: Vec<f64> = centre
            .samples
            .iter()
            .map(|(x, _)| basis_values(dim, k, unit_vector(*x, dim))[offset])
            .collect();
        let profile = RadialProfile::from_fn(rule, |rho| {
            let shell = band.multiplier(m, m * rho);
            if shell == 0.0 {
                return Complex64::default();
            }
            let acc: Complex64 = centre
                .samples
                .iter()
                .zip(&sample_basis)
                .map(|((x, w), b)| {
                    let r = (0..dim).map(|a| x[a] * x[a]).sum::<f64>().sqrt();
                    w * (radial_kernel(k, dim, m * rho * r) * b)
                })
                .sum();
            pre * acc * shell
        })?;
        let lo = if m == band.lowest() { 0.0 } else { 0.5 };
        Ok(profile.with_support(lo, 2.0))
    }

    /// Compares `Σ_{k ≤ k_max, l} ‖ĉ^{M,i}_{k,l}‖²_{L²(ρ^{d−1}dρ)}` with `‖ĝ^M_i‖²_{L²}`,
    /// both by quadrature on a common radial rule; the right side uses a sphere
    /// rule fine enough to resolve degrees well beyond `k_max`.
    pub fn parseval_check(&self, m: f64, centre: [i64; 3], k_max: usize) -> Result<ParsevalCheck> {
        let dim = self.grid.dim();
        let band = DyadicBand::for_grid(&self.grid);
        let lo = if m == band.lowest() { 0.0 } else { 0.5 };
        let rule = crate::quadrature::composite_gauss(lo, 2.0, 24, 16);
        let coefficient_sum: f64 = basis_indices(dim, k_max)
            .into_par_iter()
            .map(|(k, l)| self.coefficient(m, centre, k, l, &rule).map(|c| c.norm_sq(dim)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .sum();
        let order = 4 * k_max + 24;
        let spec = crate::sphere::angular_decompose_fn(
            dim,
            |eta| self.rescaled_spectrum(m, centre, eta).unwrap_or_default(),
            &rule,
            0,
            order,
        )?;
        let spectrum_norm_sq = spec.total;
        let relative_error = if spectrum_norm_sq > 0.0 {
            (coefficient_sum - spectrum_norm_sq).abs() / spectrum_norm_sq
        } else {
            coefficient_sum.abs()
        };
        Ok(ParsevalCheck { m, centre, k_max, coefficient_sum, spectrum_norm_sq, relative_error })
    }

    /// `ĝ^M_i(η)`, the transform of `P_M(ϕ_i f)(·/M)`, summed directly over the samples.
    pub fn rescaled_spectrum(&self, m: f64, centre: [i64; 3], eta: [f64; 3]) -> Result<Complex64> {
        let dim = self.grid.dim();
        let (_, centre) = self.lookup(m, centre)?;
        let band = DyadicBand::for_grid(&self.grid);
        let r = (0..dim).map(|a| eta[a] * eta[a]).sum::<f64>().sqrt();
        let shell = band.multiplier(m, m * r);
        if shell == 0.0 {
            return Ok(Complex64::default());
        }
        let acc: Complex64 = centre
            .samples
            .iter()
            .map(|(x, w)| {
                let phase: f64 = (0..dim).map(|a| m * eta[a] * x[a]).sum();
                w * Complex64::from_polar(1.0, -phase)
            })
            .sum();
        Ok(acc * (shell * m.powi(dim as i32)))
    }
}

/// `f^ω = Σ X^M_{i,j,k,l}(ω) P_j f^{M,i}_{k,l}` for realization `trial`.
pub fn sample_randomization(atlas: &DecompositionAtlas, family: &RandomCoefficientFamily, trial: u64) -> RandomizedSample {
    RandomizedSample {
        family: *family,
        trial,
        field: atlas.assemble_rows(|m_exp, i, k, l, js, xs| {
            let row = family.row(trial, m_exp, i, k, l);
            for (x, j) in xs.iter_mut().zip(js) {
                *x = row.at(*j);
            }
        }),
    }
}

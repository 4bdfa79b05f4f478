//! Smooth partitions of unity: the physical family `ϕ_i` centred on the integer
//! lattice of the torus, and the unit-scale frequency family `ψ_j`.

use crate::cutoff::bump;
use crate::dyadic::Projection;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use num_complex::Complex64;

/// Inner radius of the cutoff: `ϕ = 1` on `|x| ≤ √dim`, `ϕ = 0` on `|x| ≥ 2√dim`.
pub fn cutoff_radius(dim: usize) -> f64 {
    (dim as f64).sqrt()
}

/// `x` reduced to `[−L/2, L/2)`.
pub fn min_image(x: f64, l: f64) -> f64 {
    x - l * (x / l).round()
}

/// One grid point inside the support of a `ϕ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPoint {
    pub flat: usize,
    /// Minimum-image displacement `x − i`.
    pub offset: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    grid: Grid,
    radius: f64,
    centers: Vec<[i64; 3]>,
    denominators: Vec<f64>,
}

/// Builds the normalized family `ϕ_i(x) = ϕ(x − i) / Σ_k ϕ(x − k)` on a torus of integer side.
pub fn make_partition(grid: &Grid) -> Result<PartitionOfUnity> {
    let dim = grid.dim();
    let l = grid.box_length();
    let radius = cutoff_radius(dim);
    if !grid.has_integer_box() {
        return Err(Error::BoxTooSmall(format!(
            "box length {l} must be an integer for lattice centres"
        )));
    }
    if l <= 4.0 * radius || l < 3.0 {
        return Err(Error::BoxTooSmall(format!(
            "box length {l} cannot hold a bump of diameter {}",
            4.0 * radius
        )));
    }
    let side = l as i64;
    let lo = -(side / 2);
    let mut centers = Vec::with_capacity((side as usize).pow(dim as u32));
    let span = |a: usize| if a < dim { side } else { 1 };
    for a in 0..span(0) {
        for b in 0..span(1) {
            for c in 0..span(2) {
                let mut i = [0i64; 3];
                i[0] = lo + a;
                if dim > 1 {
                    i[1] = lo + b;
                }
                if dim > 2 {
                    i[2] = lo + c;
                }
                centers.push(i);
            }
        }
    }
    let reach = 2.0 * radius;
    let denominators = (0..grid.len())
        .map(|flat| {
            let x = grid.position(flat);
            let mut ranges = [(0i64, 0i64); 3];
            for (a, r) in ranges.iter_mut().enumerate().take(dim) {
                *r = ((x[a] - reach).ceil() as i64, (x[a] + reach).floor() as i64);
            }
            let mut sum = 0.0;
            for k0 in ranges[0].0..=ranges[0].1 {
                for k1 in ranges[1].0..=ranges[1].1 {
                    for k2 in ranges[2].0..=ranges[2].1 {
                        let k = [k0 as f64, k1 as f64, k2 as f64];
                        let r2: f64 = (0..dim).map(|a| (x[a] - k[a]).powi(2)).sum();
                        sum += bump(r2.sqrt(), radius);
                    }
                }
            }
            sum
        })
        .collect();
    Ok(PartitionOfUnity {
        grid: *grid,
        radius,
        centers,
        denominators,
    })
}

impl PartitionOfUnity {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[[i64; 3]] {
        &self.centers
    }

    fn offset(&self, center: [i64; 3], x: [f64; 3]) -> [f64; 3] {
        let l = self.grid.box_length();
        let mut d = [0.0; 3];
        for (a, da) in d.iter_mut().enumerate().take(self.grid.dim()) {
            *da = min_image(x[a] - center[a] as f64, l);
        }
        d
    }

    /// `ϕ_i` at a grid point.
    pub fn weight(&self, center: usize, flat: usize) -> f64 {
        let d = self.offset(self.centers[center], self.grid.position(flat));
        let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        bump(r, self.radius) / self.denominators[flat]
    }

    /// Grid points where `ϕ_i > 0`, scanning only the bounding box of the bump.
    pub fn support(&self, center: usize) -> Vec<SupportPoint> {
        let grid = &self.grid;
        let dim = grid.dim();
        let n = grid.points() as i64;
        let h = grid.spacing();
        let c = self.centers[center];
        let reach = 2.0 * self.radius;
        let mut axes: [Vec<usize>; 3] = [vec![0], vec![0], vec![0]];
        for (a, axis) in axes.iter_mut().enumerate().take(dim) {
            // x_m = −L/2 + m h
            let centre_m = (c[a] as f64 + grid.box_length() / 2.0) / h;
            let lo = (centre_m - reach / h).floor() as i64;
            let hi = (centre_m + reach / h).ceil() as i64;
            let mut ms: Vec<usize> = (lo..=hi).map(|m| m.rem_euclid(n) as usize).collect();
            ms.sort_unstable();
            ms.dedup();
            *axis = ms;
        }
        let mut out = Vec::new();
        for &m0 in &axes[0] {
            for &m1 in &axes[1] {
                for &m2 in &axes[2] {
                    let flat = grid.ravel([m0, m1, m2]);
                    let d = self.offset(c, grid.position(flat));
                    let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let b = bump(r, self.radius);
                    if b > 0.0 {
                        out.push(SupportPoint {
                            flat,
                            offset: d,
                            weight: b / self.denominators[flat],
                        });
                    }
                }
            }
        }
        out
    }

    /// `ϕ_i f` as a full field.
    pub fn localize(&self, field: &Field, center: usize) -> Field {
        let mut values = vec![num_complex::Complex64::default(); self.grid.len()];
        for p in self.support(center) {
            values[p.flat] = field.values()[p.flat] * p.weight;
        }
        Field::new(self.grid, values).expect("same grid")
    }
}

/// Unit-scale frequency weights `ψ_j(ξ)` for every `j` with `ψ_j(ξ) > 0`.
pub fn unit_weights(dim: usize, xi: [f64; 3]) -> Vec<([i64; 3], f64)> {
    let radius = cutoff_radius(dim);
    let reach = 2.0 * radius;
    let mut ranges = [(0i64, 0i64); 3];
    for (a, r) in ranges.iter_mut().enumerate().take(dim) {
        *r = ((xi[a] - reach).ceil() as i64, (xi[a] + reach).floor() as i64);
    }
    let mut out = Vec::new();
    let mut total = 0.0;
    for k0 in ranges[0].0..=ranges[0].1 {
        for k1 in ranges[1].0..=ranges[1].1 {
            for k2 in ranges[2].0..=ranges[2].1 {
                let k = [k0, k1, k2];
                let r2: f64 = (0..dim).map(|a| (xi[a] - k[a] as f64).powi(2)).sum();
                let b = bump(r2.sqrt(), radius);
                if b > 0.0 {
                    total += b;
                    out.push((k, b));
                }
            }
        }
    }
    for w in &mut out {
        w.1 /= total;
    }
    out
}

/// `ψ_j(ξ)`.
pub fn unit_multiplier(dim: usize, j: [i64; 3], xi: [f64; 3]) -> f64 {
    let radius = cutoff_radius(dim);
    let r2: f64 = (0..dim).map(|a| (xi[a] - j[a] as f64).powi(2)).sum();
    if bump(r2.sqrt(), radius) == 0.0 {
        return 0.0;
    }
    unit_weights(dim, xi)
        .into_iter()
        .find(|(k, _)| *k == j)
        .map_or(0.0, |(_, w)| w)
}

/// Every `j` whose `ψ_j` meets the frequency lattice of `grid`.
pub fn unit_indices(grid: &Grid) -> Vec<[i64; 3]> {
    let dim = grid.dim();
    let mut seen = std::collections::BTreeSet::new();
    for flat in 0..grid.len() {
        for (j, _) in unit_weights(dim, grid.frequency(flat)) {
            seen.insert(j);
        }
    }
    seen.into_iter().collect()
}

/// Largest number of `ψ_j` that are simultaneously nonzero at a lattice frequency.
pub fn unit_overlap(grid: &Grid) -> usize {
    (0..grid.len())
        .map(|flat| unit_weights(grid.dim(), grid.frequency(flat)).len())
        .max()
        .unwrap_or(0)
}

/// Unit-scale projection `P_j f`.
pub fn unit_project(field: &Field, j: [i64; 3]) -> Projection {
    let grid = *field.grid();
    let table: Vec<f64> = (0..grid.len())
        .map(|flat| unit_multiplier(grid.dim(), j, grid.frequency(flat)))
        .collect();
    if table.iter().all(|&w| w == 0.0) {
        return Projection {
            field: Field::zeros(grid),
            empty_band: true,
        };
    }
    Projection {
        field: field.apply_table(&table),
        empty_band: false,
    }
}

/// Every `P_j` on one grid, with the sparse multiplier tables built in a single
/// pass over the frequency lattice.
#[derive(Debug, Clone)]
pub struct UnitProjector {
    grid: Grid,
    tables: std::collections::BTreeMap<[i64; 3], Vec<(usize, f64)>>,
}

impl UnitProjector {
    pub fn new(grid: &Grid) -> Self {
        let mut tables: std::collections::BTreeMap<[i64; 3], Vec<(usize, f64)>> = Default::default();
        for flat in 0..grid.len() {
            for (j, w) in unit_weights(grid.dim(), grid.frequency(flat)) {
                tables.entry(j).or_default().push((flat, w));
            }
        }
        UnitProjector { grid: *grid, tables }
    }

    /// Same set as `unit_indices`.
    pub fn indices(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        self.tables.keys().copied()
    }

    pub fn project(&self, field: &Field, j: [i64; 3]) -> Result<Projection> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch("projector built for another grid".into()));
        }
        let Some(table) = self.tables.get(&j) else {
            return Ok(Projection {
                field: Field::zeros(self.grid),
                empty_band: true,
            });
        };
        let src = field.spectral();
        let mut spec = vec![Complex64::default(); self.grid.len()];
        for &(flat, w) in table {
            spec[flat] = src[flat] * w;
        }
        Ok(Projection {
            field: Field::from_spectral(self.grid, spec)?,
            empty_band: false,
        })
    }
}

use serde::{Deserialize, Serialize};

use crate::cutoff::{annulus, low_pass};
use crate::field::Field;
use crate::grid::Grid;

/// The dyadic frequencies `M = 2^e` resolvable on a grid.
///
/// The lowest shell absorbs the zero mode, so the shells reconstruct every
/// lattice frequency exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicBand {
    pub min_exp: i32,
    pub max_exp: i32,
}

impl DyadicBand {
    pub fn for_grid(grid: &Grid) -> Self {
        let min_exp = grid.frequency_step().log2().floor() as i32;
        let max_exp = grid.max_frequency().log2().ceil() as i32;
        DyadicBand { min_exp, max_exp }
    }

    pub fn contains(&self, m: f64) -> bool {
        let e = m.log2();
        e.fract() == 0.0 && (self.min_exp as f64..=self.max_exp as f64).contains(&e)
    }

    /// All resolvable dyadic frequencies, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        (self.min_exp..=self.max_exp).map(|e| 2f64.powi(e)).collect()
    }

    pub fn lowest(&self) -> f64 {
        2f64.powi(self.min_exp)
    }

    /// Multiplier of shell `m` at frequency modulus `r`.
    pub fn multiplier(&self, m: f64, r: f64) -> f64 {
        if m == self.lowest() {
            low_pass(r / m)
        } else {
            annulus(r, m)
        }
    }

    /// Multiplier table of shell `m` in FFT order.
    pub fn table(&self, grid: &Grid, m: f64) -> Vec<f64> {
        grid.frequency_norms()
            .into_iter()
            .map(|r| self.multiplier(m, r))
            .collect()
    }
}

/// Result of a frequency projection; `empty_band` flags an index outside the resolvable band.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: Field,
    pub empty_band: bool,
}

/// Littlewood–Paley projection `P_M f`.
pub fn dyadic_project(field: &Field, m: f64) -> Projection {
    let band = DyadicBand::for_grid(field.grid());
    if !band.contains(m) {
        return Projection {
            field: Field::zeros(*field.grid()),
            empty_band: true,
        };
    }
    Projection {
        field: field.apply_table(&band.table(field.grid(), m)),
        empty_band: false,
    }
}

/// Multiplier of `P_{≤n} = Σ_{M ≤ 2^n} P_M`.
pub fn low_frequency_table(grid: &Grid, level: u32) -> Vec<f64> {
    let cut = 2f64.powi(level as i32);
    grid.frequency_norms()
        .into_iter()
        .map(|r| low_pass(r / cut))
        .collect()
}

/// `P_{≤n} f`: keeps the dyadic shells up to `2^n`.
pub fn low_frequency_project(field: &Field, level: u32) -> Field {
    field.apply_table(&low_frequency_table(field.grid(), level))
}

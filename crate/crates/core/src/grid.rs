use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A periodic box `[-L/2, L/2)^dim` sampled with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    box_length: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, box_length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {box_length} must be positive")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        Ok(Grid {
            dim,
            box_length,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `L / N`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points as f64
    }

    /// Volume element `(L/N)^dim` of the Riemann sum.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Lattice spacing in frequency, `2π / L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Largest `|ξ|` on the frequency lattice (the Nyquist corner).
    pub fn max_frequency(&self) -> f64 {
        self.frequency_step() * (self.points / 2) as f64 * (self.dim as f64).sqrt()
    }

    /// Splits a flat index into per-axis indices (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0;
        for &i in idx.iter().take(self.dim) {
            flat = flat * self.points + i;
        }
        flat
    }

    /// Signed integer offset of axis index `m` from the box centre: `m - N/2`.
    pub fn centred(&self, m: usize) -> i64 {
        m as i64 - (self.points / 2) as i64
    }

    /// Coordinate of axis index `m`.
    pub fn coordinate(&self, m: usize) -> f64 {
        -0.5 * self.box_length + m as f64 * self.spacing()
    }

    /// Physical position of flat point `flat`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Signed wave number of FFT index `m` (in `[-N/2, N/2)`).
    pub fn wave_index(&self, m: usize) -> i64 {
        if m < self.points / 2 {
            m as i64
        } else {
            m as i64 - self.points as i64
        }
    }

    /// Frequency vector of flat spectral index `flat`.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = step * self.wave_index(idx[a]) as f64;
        }
        xi
    }

    /// Integer wave vector of flat spectral index.
    pub fn wave_vector(&self, flat: usize) -> [i64; 3] {
        let idx = self.unravel(flat);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = self.wave_index(idx[a]);
        }
        k
    }

    /// `|ξ|²` for every spectral index, in FFT order.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|f| {
                let xi = self.frequency(f);
                xi.iter().map(|v| v * v).sum()
            })
            .collect()
    }

    pub fn frequency_norms(&self) -> Vec<f64> {
        self.frequency_norms_sq().into_iter().map(f64::sqrt).collect()
    }

    /// True when the box holds a whole number of unit cells per axis.
    pub fn has_integer_box(&self) -> bool {
        (self.box_length - self.box_length.round()).abs() < 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0, 1.0, 16).is_err());
        assert!(Grid::new(4, 1.0, 16).is_err());
        assert!(Grid::new(1, 1.0, 12).is_err());
        assert!(Grid::new(1, 1.0, 4).is_err());
        assert!(Grid::new(1, -1.0, 16).is_err());
        assert!(Grid::new(2, 1.0, 16).is_ok());
    }

    #[test]
    fn lattice_stays_within_nyquist() {
        let g = Grid::new(2, 8.0, 16).unwrap();
        for f in 0..g.len() {
            let k = g.wave_vector(f);
            assert!(k[0].abs() <= 8 && k[1].abs() <= 8);
        }
        assert_eq!(g.ravel(g.unravel(37)), 37);
    }
}

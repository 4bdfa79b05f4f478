use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::dft_in_place;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Parity factor `(-1)^{m_1+...+m_d}` that moves the DFT origin to the box corner `-L/2`.
fn parity(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let s: usize = idx.iter().take(grid.dim()).sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Maps samples to the continuous-transform normalization
/// `f̂(ξ_k) ≈ ∫ e^{-ix·ξ_k} f(x) dx` (forward) or back (inverse).
pub fn transform(grid: &Grid, data: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let mut out = data.to_vec();
    match direction {
        Direction::Forward => {
            dft_in_place(grid, &mut out, true);
            let w = grid.cell_volume();
            for (f, v) in out.iter_mut().enumerate() {
                *v *= w * parity(grid, f);
            }
        }
        Direction::Inverse => {
            let w = 1.0 / grid.volume();
            for (f, v) in out.iter_mut().enumerate() {
                *v *= w * parity(grid, f);
            }
            dft_in_place(grid, &mut out, false);
        }
    }
    out
}

/// Complex samples on a periodic grid with a lazily cached spectral view.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field {
            grid,
            values,
            spectral: OnceLock::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![Complex64::default(); grid.len()],
            spectral: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Field {
            grid,
            values,
            spectral: OnceLock::new(),
        }
    }

    /// Builds a field from its spectral coefficients (continuous normalization).
    pub fn from_spectral(grid: Grid, spectral: Vec<Complex64>) -> Result<Self> {
        if spectral.len() != grid.len() {
            return Err(Error::GridMismatch("spectral length".into()));
        }
        let values = transform(&grid, &spectral, Direction::Inverse);
        let cell = OnceLock::new();
        let _ = cell.set(spectral);
        Ok(Field {
            grid,
            values,
            spectral: cell,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn spectral(&self) -> &[Complex64] {
        self.spectral
            .get_or_init(|| transform(&self.grid, &self.values, Direction::Forward))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Applies a spectral multiplier `m(ξ)` given as a function of the flat spectral index.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> Complex64 + Sync) -> Field {
        let spec: Vec<Complex64> = self
            .spectral()
            .iter()
            .enumerate()
            .map(|(f, v)| v * m(f))
            .collect();
        Field::from_spectral(self.grid, spec).expect("same grid")
    }

    /// Applies a real radial multiplier from a precomputed table in FFT order.
    pub fn apply_table(&self, table: &[f64]) -> Field {
        let spec: Vec<Complex64> = self
            .spectral()
            .iter()
            .zip(table)
            .map(|(v, m)| v * m)
            .collect();
        Field::from_spectral(self.grid, spec).expect("same grid")
    }

    /// Spectral partial derivatives `∂_a f`, one field per axis.
    pub fn gradient(&self) -> Vec<Field> {
        (0..self.grid.dim())
            .map(|a| {
                self.apply_multiplier(|f| Complex64::new(0.0, self.grid.frequency(f)[a]))
            })
            .collect()
    }

    /// Pointwise `|∇f|`.
    pub fn gradient_magnitude(&self) -> Vec<f64> {
        let grads = self.gradient();
        (0..self.grid.len())
            .map(|i| grads.iter().map(|g| g.values[i].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    pub fn laplacian(&self) -> Field {
        let norms = self.grid.frequency_norms_sq();
        self.apply_multiplier(|f| Complex64::new(-norms[f], 0.0))
    }

    /// `‖f‖²_{L²}` by the grid sum.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `‖f‖²_{L²}` from the spectral side, `L^{-d} Σ |f̂(ξ_k)|²`.
    pub fn spectral_mass(&self) -> f64 {
        self.spectral().iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.volume()
    }

    /// `‖f‖_{L^r}` for `r ≥ 1` (use `f64::INFINITY` for the maximum).
    pub fn lp_norm(&self, r: f64) -> f64 {
        lp_of_moduli(self.values.iter().map(|v| v.norm()), r, self.grid.cell_volume())
    }

    /// Homogeneous Sobolev seminorm `‖|∇|^s f‖_{L²}`.
    pub fn hdot_norm(&self, s: f64) -> f64 {
        let norms = self.grid.frequency_norms();
        let sum: f64 = self
            .spectral()
            .iter()
            .zip(&norms)
            .map(|(v, k)| if *k == 0.0 { 0.0 } else { k.powf(2.0 * s) * v.norm_sqr() })
            .sum();
        (sum / self.grid.volume()).sqrt()
    }

    /// Inhomogeneous Sobolev norm `‖⟨∇⟩^s f‖_{L²}`.
    pub fn h_norm(&self, s: f64) -> f64 {
        let norms = self.grid.frequency_norms_sq();
        let sum: f64 = self
            .spectral()
            .iter()
            .zip(&norms)
            .map(|(v, k2)| (1.0 + k2).powf(s) * v.norm_sqr())
            .sum();
        (sum / self.grid.volume()).sqrt()
    }

    /// Continuous Fourier transform of the sampled function at an arbitrary frequency,
    /// `Σ_m (L/N)^d f(x_m) e^{-i x_m·ξ}`.
    pub fn spectral_at(&self, xi: [f64; 3]) -> Complex64 {
        let mut acc = Complex64::default();
        for (m, v) in self.values.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let x = self.grid.position(m);
            let phase: f64 = (0..self.grid.dim()).map(|a| x[a] * xi[a]).sum();
            acc += v * Complex64::from_polar(1.0, -phase);
        }
        acc * self.grid.cell_volume()
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field::new(self.grid, self.values.iter().map(|v| v * c).collect()).expect("same grid")
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::new(self.grid, self.values.iter().map(|v| f(*v)).collect()).expect("same grid")
    }

    pub fn try_add(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        Field::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        Field::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        )
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖` (absolute when `other = 0`).
    pub fn relative_l2_error(&self, other: &Field) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        if base == 0.0 {
            diff.sqrt()
        } else {
            (diff / base).sqrt()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    // --- serialization -------------------------------------------------

    /// Writes the self-describing binary container.
    pub fn write_binary<W: Write>(&self, w: &mut W, layout: Layout) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u8(self.grid.dim() as u8)?;
        w.write_u8(layout as u8)?;
        w.write_u16::<LittleEndian>(0)?;
        w.write_f64::<LittleEndian>(self.grid.box_length())?;
        w.write_u32::<LittleEndian>(self.grid.points() as u32)?;
        for v in &self.values {
            match layout {
                Layout::Complex64 => {
                    w.write_f32::<LittleEndian>(v.re as f32)?;
                    w.write_f32::<LittleEndian>(v.im as f32)?;
                }
                Layout::Complex128 => {
                    w.write_f64::<LittleEndian>(v.re)?;
                    w.write_f64::<LittleEndian>(v.im)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Field> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad field magic".into()));
        }
        let dim = r.read_u8()? as usize;
        let layout = match r.read_u8()? {
            0 => Layout::Complex64,
            1 => Layout::Complex128,
            other => return Err(Error::Format(format!("unknown layout {other}"))),
        };
        let _ = r.read_u16::<LittleEndian>()?;
        let box_length = r.read_f64::<LittleEndian>()?;
        let points = r.read_u32::<LittleEndian>()? as usize;
        let grid = Grid::new(dim, box_length, points)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let v = match layout {
                Layout::Complex64 => Complex64::new(
                    r.read_f32::<LittleEndian>()? as f64,
                    r.read_f32::<LittleEndian>()? as f64,
                ),
                Layout::Complex128 => Complex64::new(
                    r.read_f64::<LittleEndian>()?,
                    r.read_f64::<LittleEndian>()?,
                ),
            };
            values.push(v);
        }
        Field::new(grid, values)
    }

    /// CSV with one row per grid point: coordinates, real and imaginary parts.
    pub fn to_csv(&self) -> String {
        let axes = ["x", "y", "z"];
        let mut out = String::new();
        for a in axes.iter().take(self.grid.dim()) {
            out.push_str(a);
            out.push(',');
        }
        out.push_str("re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.position(i);
            for c in x.iter().take(self.grid.dim()) {
                out.push_str(&format!("{c:.17e},"));
            }
            out.push_str(&format!("{:.17e},{:.17e}\n", v.re, v.im));
        }
        out
    }
}

const MAGIC: &[u8; 4] = b"DLF1";

/// Payload precision of the binary container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Little-endian `f32` real/imaginary pairs.
    Complex64 = 0,
    /// Little-endian `f64` pairs (lossless).
    Complex128 = 1,
}

/// Discrete `L^r` norm of sampled moduli with uniform cell weight.
pub fn lp_of_moduli(moduli: impl Iterator<Item = f64>, r: f64, cell: f64) -> f64 {
    if r.is_infinite() {
        moduli.fold(0.0, f64::max)
    } else {
        let s: f64 = moduli.map(|m| m.powf(r)).sum();
        (s * cell).powf(1.0 / r)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.try_add(rhs).expect("fields on different grids")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.try_sub(rhs).expect("fields on different grids")
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let vals = (0..grid.len()).map(|_| Complex64::new(next(), next())).collect();
        Field::new(grid, vals).unwrap()
    }

    #[test]
    fn single_mode_is_a_spectral_delta() {
        let grid = Grid::new(1, 6.0, 32).unwrap();
        let l = grid.box_length();
        let f = Field::from_fn(grid, |x| Complex64::from_polar(1.0, 2.0 * PI * x[0] / l));
        for (k, v) in f.spectral().iter().enumerate() {
            if grid.wave_index(k) == 1 {
                assert!((v - Complex64::new(l, 0.0)).norm() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_field_has_zero_mode_mass_volume() {
        let grid = Grid::new(2, 3.0, 16).unwrap();
        let f = Field::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        let spec = f.spectral();
        assert!((spec[0] - Complex64::new(9.0, 0.0)).norm() < 1e-12);
        assert!(spec[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn round_trip_and_plancherel() {
        for dim in 1..=3 {
            let grid = Grid::new(dim, 5.0, 16).unwrap();
            let f = random_field(grid, 7 + dim as u64);
            let back = Field::from_spectral(grid, f.spectral().to_vec()).unwrap();
            assert!(back.relative_l2_error(&f) < 1e-12);
            assert!((f.mass() - f.spectral_mass()).abs() / f.mass() < 1e-12);
        }
    }

    #[test]
    fn spectral_at_lattice_matches_fft() {
        let grid = Grid::new(2, 4.0, 8).unwrap();
        let f = random_field(grid, 3);
        for k in [0usize, 5, 17, 63] {
            let direct = f.spectral_at(grid.frequency(k));
            assert!((direct - f.spectral()[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn binary_container_round_trips() {
        let grid = Grid::new(2, 4.0, 8).unwrap();
        let f = random_field(grid, 11);
        let mut buf = Vec::new();
        f.write_binary(&mut buf, Layout::Complex128).unwrap();
        let g = Field::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
        let mut buf32 = Vec::new();
        f.write_binary(&mut buf32, Layout::Complex64).unwrap();
        assert_eq!(buf32.len(), 4 + 4 + 8 + 4 + 8 * grid.len());
        let h = Field::read_binary(&mut buf32.as_slice()).unwrap();
        assert!(h.relative_l2_error(&f) < 1e-6);
    }

    #[test]
    fn lp_norms_of_constant() {
        let grid = Grid::new(1, 2.0, 16).unwrap();
        let f = Field::from_fn(grid, |_| Complex64::new(3.0, 0.0));
        assert!((f.lp_norm(2.0) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((f.lp_norm(f64::INFINITY) - 3.0).abs() < 1e-15);
    }
}

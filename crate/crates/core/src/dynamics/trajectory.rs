use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Layout};

const MAGIC: &[u8; 4] = b"DLT1";
const UNIFORM_TOLERANCE: f64 = 1e-6;

/// Provenance of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub method: String,
    pub level: Option<u32>,
    pub exponent: Option<f64>,
    pub forcing: String,
    pub stride: usize,
    pub adaptive: bool,
}

impl Default for TrajectoryMeta {
    fn default() -> Self {
        TrajectoryMeta {
            method: "external".into(),
            level: None,
            exponent: None,
            forcing: "none".into(),
            stride: 1,
            adaptive: false,
        }
    }
}

/// Time-stamped snapshots of the `v` component.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Field>,
    dt: f64,
    meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Field>, dt: f64, meta: TrajectoryMeta) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        let grid = *states[0].grid();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch("trajectory snapshots on different grids".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        if !meta.adaptive && times.len() > 2 {
            let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > UNIFORM_TOLERANCE * h) {
                return Err(Error::InvalidArgument("snapshot spacing is not uniform".into()));
            }
        }
        Ok(Trajectory { times, states, dt, meta })
    }

    /// Uniformly spaced snapshots on `[t0, t1]`.
    pub fn uniform(t0: f64, t1: f64, states: Vec<Field>) -> Result<Self> {
        let n = states.len();
        let times = if n == 1 {
            vec![t0]
        } else {
            (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
        };
        let dt = if n > 1 { (t1 - t0) / (n - 1) as f64 } else { 0.0 };
        Trajectory::new(times, states, dt, TrajectoryMeta::default())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Field {
        &self.states[i]
    }

    pub fn first(&self) -> &Field {
        &self.states[0]
    }

    pub fn last(&self) -> &Field {
        &self.states[self.states.len() - 1]
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Nominal integrator step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Spacing between snapshots (0 for a single snapshot).
    pub fn spacing(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            (self.end() - self.start()) / (self.len() - 1) as f64
        }
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.states[0].grid()
    }

    /// Snapshot index at time `t`, if `t` is a snapshot time.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.spacing().max(f64::MIN_POSITIVE).max(1e-300);
        self.times.iter().position(|s| (s - t).abs() <= tol.max(1e-12 * t.abs()))
    }

    /// Snapshots `i0..=i1`.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Trajectory> {
        if i0 > i1 || i1 >= self.len() {
            return Err(Error::InvalidArgument(format!("slice {i0}..={i1} of {}", self.len())));
        }
        Ok(Trajectory {
            times: self.times[i0..=i1].to_vec(),
            states: self.states[i0..=i1].to_vec(),
            dt: self.dt,
            meta: self.meta.clone(),
        })
    }

    pub fn map_states(&self, f: impl Fn(f64, &Field) -> Field) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.times.iter().zip(&self.states).map(|(t, s)| f(*t, s)).collect(),
            dt: self.dt,
            meta: self.meta.clone(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Trajectory {
        self.map_states(|_, s| s.scale(c))
    }

    /// Snapshot-wise difference; times must agree.
    pub fn try_sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.len() != other.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::InvalidArgument("trajectories sampled at different times".into()));
        }
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: self.times.clone(),
            states,
            dt: self.dt,
            meta: self.meta.clone(),
        })
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(self.len() as u32)?;
        w.write_f64::<LittleEndian>(self.dt)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            w.write_f64::<LittleEndian>(*t)?;
            s.write_binary(w, Layout::Complex128)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Trajectory> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a trajectory file".into()));
        }
        let count = r.read_u32::<LittleEndian>()? as usize;
        let dt = r.read_f64::<LittleEndian>()?;
        let mut times = Vec::with_capacity(count);
        let mut states = Vec::with_capacity(count);
        for _ in 0..count {
            times.push(r.read_f64::<LittleEndian>()?);
            states.push(Field::read_binary(r)?);
        }
        Trajectory::new(times, states, dt, TrajectoryMeta::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn sample() -> Trajectory {
        let g = Grid::new(2, 4.0, 8).unwrap();
        let states = (0..5)
            .map(|k| Field::from_fn(g, |x| Complex64::new(x[0] * k as f64, x[1] - k as f64)))
            .collect();
        Trajectory::uniform(0.0, 1.0, states).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        let back = Trajectory::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back.times(), t.times());
        assert_eq!(back.states(), t.states());
        assert!(Trajectory::read_binary(&mut &b"XXXX"[..]).is_err());
    }

    #[test]
    fn rejects_bad_times() {
        let t = sample();
        let s = t.states().to_vec();
        assert!(Trajectory::new(vec![0.0, 0.1, 0.1, 0.3, 0.4], s.clone(), 0.1, TrajectoryMeta::default()).is_err());
        assert!(Trajectory::new(vec![0.0, 0.1, 0.25, 0.3, 0.4], s.clone(), 0.1, TrajectoryMeta::default()).is_err());
        let meta = TrajectoryMeta { adaptive: true, ..Default::default() };
        assert!(Trajectory::new(vec![0.0, 0.1, 0.25, 0.3, 0.4], s, 0.1, meta).is_ok());
    }

    #[test]
    fn index_and_slice() {
        let t = sample();
        assert_eq!(t.index_of(0.5), Some(2));
        assert_eq!(t.index_of(0.6), None);
        let s = t.slice(1, 3).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.start(), 0.25);
        assert!(t.try_sub(&t).unwrap().states().iter().all(|s| s.is_zero()));
    }
}

//! Experiment configuration: one TOML file per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use dlab_core::randomization::{Distribution, Truncation};
use dlab_core::{Field, Grid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Decompose,
    Randomize,
    Evolve,
    Norms,
    Montecarlo,
    EnergyAudit,
    Perturb,
}

impl Kind {
    /// CLI subcommand spelling.
    pub fn command(self) -> &'static str {
        match self {
            Kind::Decompose => "decompose",
            Kind::Randomize => "randomize",
            Kind::Evolve => "evolve",
            Kind::Norms => "norms",
            Kind::Montecarlo => "montecarlo",
            Kind::EnergyAudit => "energy-audit",
            Kind::Perturb => "perturb",
        }
    }

    pub fn from_command(s: &str) -> Option<Kind> {
        [
            Kind::Decompose,
            Kind::Randomize,
            Kind::Evolve,
            Kind::Norms,
            Kind::Montecarlo,
            Kind::EnergyAudit,
            Kind::Perturb,
        ]
        .into_iter()
        .find(|k| k.command() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub box_length: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, HarnessError> {
        Ok(Grid::new(self.dim, self.box_length, self.points)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Gaussian,
    Sech,
    Zero,
}

/// A synthetic datum `A·profile(|x-c|/w)·e^{ik·x}`, or a stored Field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    #[serde(default = "default_shape")]
    pub shape: Shape,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default)]
    pub momentum: [f64; 3],
    /// Binary Field file; overrides the synthetic shape.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_shape() -> Shape {
    Shape::Gaussian
}

fn one() -> f64 {
    1.0
}

impl DatumConfig {
    pub fn build(&self, grid: Grid, base: &Path) -> Result<Field, HarnessError> {
        if let Some(p) = &self.path {
            let path = base.join(p);
            let mut file = std::io::BufReader::new(
                std::fs::File::open(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?,
            );
            let f = Field::read_binary(&mut file)?;
            if *f.grid() != grid {
                return Err(HarnessError::Config(format!("{} was stored on a different grid", path.display())));
            }
            return Ok(f);
        }
        if !(self.width > 0.0) {
            return Err(HarnessError::Config(format!("datum width must be positive, got {}", self.width)));
        }
        let (a, w, c, k) = (self.amplitude, self.width, self.center, self.momentum);
        let shape = self.shape;
        let dim = grid.dim();
        Ok(Field::from_fn(grid, move |x| {
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for i in 0..dim {
                let y = x[i] - c[i];
                r2 += y * y;
                phase += k[i] * x[i];
            }
            let r = r2.sqrt() / w;
            let profile = match shape {
                Shape::Gaussian => (-r * r).exp(),
                Shape::Sech => 1.0 / r.cosh(),
                Shape::Zero => 0.0,
            };
            Complex64::from_polar(a * profile, phase)
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Truncation level `n` of the nonlinearity.
    pub level: u32,
    pub dt: f64,
    pub t0: f64,
    pub t1: f64,
    #[serde(default = "one_usize")]
    pub stride: usize,
    #[serde(default = "one")]
    pub strength: f64,
    /// `F_n = P_{≤2^k} F` when set; untruncated otherwise.
    #[serde(default)]
    pub forcing_level: Option<u32>,
}

fn one_usize() -> usize {
    1
}

/// A norm by name (`v`, `w`, `wdot`, `r`, `rdot`, `x`, `y`, `z`) or by exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub name: String,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub deriv: u8,
    #[serde(default)]
    pub weight: Option<f64>,
    #[serde(default = "half")]
    pub sigma: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Atlas randomization on the periodic grid.
    Grid,
    /// Radial randomization with Fourier–Bessel flow in `ℝ^d`.
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub s: f64,
    pub q: f64,
    pub p: f64,
    pub p0: f64,
    pub window: (f64, f64),
    pub snapshots: usize,
    #[serde(default)]
    pub sigma_t: Option<f64>,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_dim")]
    pub radial_dim: usize,
    #[serde(default = "default_rmax")]
    pub r_max: f64,
    #[serde(default = "default_rhomax")]
    pub rho_max: f64,
    /// Acceptance bound on `ratio/√β`, checked under `--check`.
    #[serde(default = "ten")]
    pub bound: f64,
}

fn default_backend() -> Backend {
    Backend::Grid
}
fn default_dim() -> usize {
    7
}
fn default_rmax() -> f64 {
    12.0
}
fn default_rhomax() -> f64 {
    8.0
}
fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Step sizes for the refinement study; the solver's own `dt` is ignored.
    pub dts: Vec<f64>,
    #[serde(default = "eta")]
    pub eta: f64,
    #[serde(default = "sigma")]
    pub sigma: f64,
    /// Accepted distance of the fitted slope from 2.
    #[serde(default = "slope_tol")]
    pub slope_tolerance: f64,
}

fn eta() -> f64 {
    0.1
}
fn sigma() -> f64 {
    0.01
}
fn slope_tol() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    pub eps: Vec<f64>,
    #[serde(default = "smallness")]
    pub smallness: f64,
}

fn smallness() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "seven")]
    pub d_param: f64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Initial data `v0`, forcing datum, or randomized datum depending on `kind`.
    #[serde(default)]
    pub datum: Option<DatumConfig>,
    #[serde(default)]
    pub initial: Option<DatumConfig>,
    #[serde(default)]
    pub truncation: Option<Truncation>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub norms: Vec<NormConfig>,
    #[serde(default)]
    pub distribution: Option<Distribution>,
    /// Number of randomized samples written by `randomize`.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub montecarlo: Option<MonteCarloConfig>,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub perturb: Option<PerturbConfig>,
    /// Stored trajectory read by `norms`.
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
}

fn seven() -> f64 {
    7.0
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn require<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T, HarnessError> {
        field
            .as_ref()
            .ok_or_else(|| HarnessError::Config(format!("kind '{}' needs a [{name}] section", self.kind.command())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
kind = "montecarlo"
seed = 11
d_param = 7.0
distribution = "rademacher"

[grid]
dim = 2
box_length = 8.0
points = 16

[datum]
shape = "gaussian"
amplitude = 1.0

[truncation]
k_max = 8
j_radius = 4.0
tolerance = 5e-3

[montecarlo]
trials = 10
s = 0.75
q = 4.0
p = 4.0
p0 = 4.0
window = [0.0, 0.5]
snapshots = 9
"#;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.kind, Kind::Montecarlo);
        assert_eq!(c.montecarlo.as_ref().unwrap().backend, Backend::Grid);
        let again = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SAMPLE.replace("seed = 11", "seed = 11\nsed = 3");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(HarnessError::Config(_))));
        let bad = SAMPLE.replace("points = 16", "points = 16\npionts = 3");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn commands() {
        assert_eq!(Kind::from_command("energy-audit"), Some(Kind::EnergyAudit));
        assert_eq!(Kind::from_command("energy_audit"), None);
        for k in [Kind::Decompose, Kind::Perturb, Kind::Norms] {
            assert_eq!(Kind::from_command(k.command()), Some(k));
        }
    }

    #[test]
    fn synthetic_datum() {
        let g = Grid::new(1, 8.0, 32).unwrap();
        let d = DatumConfig {
            shape: Shape::Gaussian,
            amplitude: 2.0,
            width: 1.0,
            center: [0.0; 3],
            momentum: [0.0; 3],
            path: None,
        };
        let f = d.build(g, Path::new(".")).unwrap();
        assert!((f.max_abs() - 2.0).abs() < 1e-12);
    }
}

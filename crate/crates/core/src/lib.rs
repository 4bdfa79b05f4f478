//! Numerical core for randomized energy-critical NLS experiments on periodic boxes.

pub mod audit;
pub mod bessel;
pub mod cutoff;
pub mod dyadic;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod partition;
pub mod quadrature;
pub mod radial;
pub mod randomization;
pub mod sphere;

pub use error::{Error, Result};
pub use field::{Direction, Field, Layout};
pub use grid::Grid;

//! Many-fold randomization of initial data and its probabilistic diagnostics.

pub mod atlas;
pub mod family;
pub mod khintchine;
pub mod stability;

pub use atlas::{build_atlas, sample_randomization, DecompositionAtlas, ParsevalCheck, RandomizedSample, Truncation};
pub use family::{Distribution, DrawKey, DrawRow, RandomCoefficientFamily};
pub use khintchine::{khintchine_check, KhintchineReport};
pub use stability::{hs_stability_check, hs_stability_sweep, HsReport};

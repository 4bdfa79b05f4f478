use num_complex::Complex64;

use crate::dyadic::low_frequency_project;
use crate::field::Field;
use crate::grid::Grid;

/// Exact free Schrödinger flow `e^{itΔ}`: multiplies the spectrum by `e^{-it|ξ|²}`.
pub fn free_propagate(field: &Field, t: f64) -> Field {
    if t == 0.0 {
        return field.clone();
    }
    let norms = field.grid().frequency_norms_sq();
    field.apply_multiplier(|f| Complex64::from_polar(1.0, -t * norms[f]))
}

/// `F_n(t) = e^{itΔ} P_{≤n} f`, evaluated exactly at any requested time.
#[derive(Debug, Clone)]
pub struct ForcingTerm {
    datum: Field,
    level: Option<u32>,
    label: String,
}

impl ForcingTerm {
    /// Truncates `datum` to the shells up to `2^level`.
    pub fn new(datum: &Field, level: u32, label: impl Into<String>) -> Self {
        ForcingTerm {
            datum: low_frequency_project(datum, level),
            level: Some(level),
            label: label.into(),
        }
    }

    /// Uses the datum as is.
    pub fn untruncated(datum: &Field, label: impl Into<String>) -> Self {
        ForcingTerm {
            datum: datum.clone(),
            level: None,
            label: label.into(),
        }
    }

    pub fn zero(grid: Grid) -> Self {
        ForcingTerm {
            datum: Field::zeros(grid),
            level: None,
            label: "zero".into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.datum.is_zero()
    }

    pub fn datum(&self) -> &Field {
        &self.datum
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &Grid {
        self.datum.grid()
    }

    /// Same datum scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        ForcingTerm {
            datum: &self.datum * c,
            level: self.level,
            label: format!("{}*{c}", self.label),
        }
    }

    pub fn evaluate(&self, t: f64) -> Field {
        free_propagate(&self.datum, t)
    }

    /// `∂_t F_n(t) = iΔF_n(t)`.
    pub fn time_derivative(&self, t: f64) -> Field {
        let norms = self.grid().frequency_norms_sq();
        self.datum
            .apply_multiplier(|f| Complex64::new(0.0, -norms[f]) * Complex64::from_polar(1.0, -t * norms[f]))
    }
}

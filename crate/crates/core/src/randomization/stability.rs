use rayon::prelude::*;
use serde::Serialize;

use super::atlas::{build_atlas, sample_randomization, DecompositionAtlas, Truncation};
use super::family::RandomCoefficientFamily;
use crate::error::{Error, Result};
use crate::field::Field;

/// Monte-Carlo estimate of `(E‖f^ω‖²_{Ḣ^s})^{1/2} / ‖f‖_{H^s}`.
#[derive(Debug, Clone, Serialize)]
pub struct HsReport {
    pub s: f64,
    pub trials: usize,
    pub ratio: f64,
    pub stderr: f64,
    /// Same ratio for the all-ones assignment, i.e. the truncated datum.
    pub deterministic_ratio: f64,
    pub residual: f64,
}

/// Shares one set of draws across several regularities.
pub fn hs_stability_sweep(
    atlas: &DecompositionAtlas,
    f: &Field,
    regularities: &[f64],
    family: &RandomCoefficientFamily,
    trials: usize,
) -> Result<Vec<HsReport>> {
    if trials < 2 {
        return Err(Error::TooFewTrials("at least 2 draws are needed for a standard error".into()));
    }
    let per_draw: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let sample = sample_randomization(atlas, family, t);
            regularities.iter().map(|&s| sample.field.hdot_norm(s).powi(2)).collect()
        })
        .collect();
    let n = trials as f64;
    Ok(regularities
        .iter()
        .enumerate()
        .map(|(idx, &s)| {
            let xs: Vec<f64> = per_draw.iter().map(|v| v[idx]).collect();
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let denom = f.h_norm(s);
            let ratio = mean.sqrt() / denom;
            let stderr = if mean > 0.0 { (var / n).sqrt() / (2.0 * mean.sqrt()) / denom } else { 0.0 };
            HsReport {
                s,
                trials,
                ratio,
                stderr,
                deterministic_ratio: atlas.truncated().hdot_norm(s) / denom,
                residual: atlas.residual(),
            }
        })
        .collect())
}

pub fn hs_stability_check(
    f: &Field,
    s: f64,
    family: &RandomCoefficientFamily,
    trials: usize,
    truncation: Truncation,
) -> Result<HsReport> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("regularity {s} must lie in (0, 1]")));
    }
    let atlas = build_atlas(f, truncation)?;
    Ok(hs_stability_sweep(&atlas, f, &[s], family, trials)?.remove(0))
}

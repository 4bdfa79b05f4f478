use serde::Serialize;

use super::family::RandomCoefficientFamily;
use crate::error::{Error, Result};

/// Empirical large-deviation ratio `‖Σ c_k X_k‖_{L^β(Ω)} / (√β ‖c‖₂)`.
#[derive(Debug, Clone, Serialize)]
pub struct KhintchineReport {
    pub beta: u32,
    pub trials: usize,
    /// Empirical `E|S|^β`.
    pub moment: f64,
    pub ratio: f64,
    /// Jackknife standard error of `ratio`.
    pub stderr: f64,
    pub subgaussian_constant: Option<f64>,
}

/// Smallest trial count accepted for moment order `beta`.
pub fn minimum_trials(beta: u32) -> usize {
    10 * (beta as usize).pow(2)
}

pub fn khintchine_check(
    coeffs: &[f64],
    family: &RandomCoefficientFamily,
    beta: u32,
    trials: usize,
) -> Result<KhintchineReport> {
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
    }
    if beta < 2 || beta % 2 != 0 {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be an even integer >= 2")));
    }
    if trials < minimum_trials(beta) {
        return Err(Error::TooFewTrials(format!(
            "{trials} trials cannot stabilize the order-{beta} moment; need at least {}",
            minimum_trials(beta)
        )));
    }
    let samples: Vec<f64> = (0..trials as u64)
        .map(|t| {
            let xs = family.sequence(t, coeffs.len());
            coeffs.iter().zip(&xs).map(|(c, x)| c * x).sum::<f64>().abs().powi(beta as i32)
        })
        .collect();
    let n = trials as f64;
    let total: f64 = samples.iter().sum();
    let moment = total / n;
    let scale = (beta as f64).sqrt() * norm;
    let ratio_of = |m: f64| m.powf(1.0 / beta as f64) / scale;
    let ratio = ratio_of(moment);
    let loo: Vec<f64> = samples.iter().map(|s| ratio_of((total - s) / (n - 1.0))).collect();
    let loo_mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|r| (r - loo_mean).powi(2)).sum::<f64>();
    Ok(KhintchineReport {
        beta,
        trials,
        moment,
        ratio,
        stderr: var.sqrt(),
        subgaussian_constant: family.subgaussian_constant(),
    })
}

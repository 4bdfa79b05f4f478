//! Radial profiles and the Fourier–Bessel transform of degree-`k` harmonics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::bessel_j_unchecked;
use crate::error::{Error, Result};
use crate::field::Direction;
use crate::quadrature::{composite_gauss, Rule};

/// Minimum quadrature nodes per oscillation of `J_ν(r_max s)`.
pub const NODES_PER_OSCILLATION: f64 = 10.0;

/// Samples `c(r_q)` of a radial function on a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub support_hint: Option<(f64, f64)>,
}

/// Bessel order `ν(k) = (d + 2k − 2)/2`.
pub fn bessel_order(k: usize, d: usize) -> f64 {
    (d as f64 + 2.0 * k as f64 - 2.0) / 2.0
}

/// `i^n` for integer `n`.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl RadialProfile {
    pub fn new(rule: &Rule, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != rule.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for {} nodes",
                samples.len(),
                rule.len()
            )));
        }
        if rule.nodes.windows(2).any(|w| w[1] <= w[0]) || rule.nodes.first().is_some_and(|&r| r < 0.0) {
            return Err(Error::InvalidArgument("radial nodes must be nonnegative and increasing".into()));
        }
        Ok(RadialProfile {
            nodes: rule.nodes.clone(),
            weights: rule.weights.clone(),
            samples,
            support_hint: None,
        })
    }

    pub fn from_fn(rule: &Rule, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = rule.nodes.iter().map(|&r| f(r)).collect();
        RadialProfile::new(rule, samples)
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support_hint = Some((lo, hi));
        self
    }

    pub fn rule(&self) -> Rule {
        Rule {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
        }
    }

    /// `‖c‖²` in `L²(r^{d−1} dr)`.
    pub fn norm_sq(&self, d: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.samples)
            .map(|((r, w), c)| w * c.norm_sqr() * r.powi(d as i32 - 1))
            .sum()
    }

    pub fn norm(&self, d: usize) -> f64 {
        self.norm_sq(d).sqrt()
    }

    /// Weighted mass of the samples lying outside `[lo, hi]`.
    pub fn mass_outside(&self, d: usize, lo: f64, hi: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.samples)
            .filter(|((r, _), _)| **r < lo || **r > hi)
            .map(|((r, w), c)| w * c.norm_sqr() * r.powi(d as i32 - 1))
            .sum()
    }

    /// Relative `L²(r^{d−1} dr)` distance; profiles must share their nodes.
    pub fn relative_error(&self, other: &RadialProfile, d: usize) -> f64 {
        let diff: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(self.samples.iter().zip(&other.samples))
            .map(|((r, w), (a, b))| w * (a - b).norm_sqr() * r.powi(d as i32 - 1))
            .sum();
        (diff / other.norm_sq(d)).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> RadialProfile {
        RadialProfile {
            samples: self.samples.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Gauss–Legendre panels on `[0, r_max]` sized for `J_ν(r s)` oscillation with `r s ≤ bandwidth`.
pub fn resolved_rule(r_max: f64, bandwidth: f64) -> Rule {
    let order = 16;
    let needed = (NODES_PER_OSCILLATION * bandwidth / (2.0 * std::f64::consts::PI)).ceil() as usize;
    let panels = (needed.div_ceil(order)).max(4) * 2;
    composite_gauss(0.0, r_max, panels, order)
}

/// Fourier–Bessel transform of a degree-`k` profile in `ℝ^d`, returned on the input nodes.
///
/// Forward: `F_0(r) = (2π)^{d/2} i^{−k} r^{−(d−2)/2} ∫ f_0(s) J_ν(rs) s^{d/2} ds`.
/// Inverse: `f_0(s) = (2π)^{−d/2} i^{k} s^{−(d−2)/2} ∫ F_0(r) J_ν(rs) r^{d/2} dr`.
pub fn fourier_bessel(profile: &RadialProfile, k: usize, d: usize, direction: Direction) -> Result<RadialProfile> {
    let out = profile.rule();
    fourier_bessel_to(profile, k, d, direction, &out)
}

/// As [`fourier_bessel`], evaluated on an explicit output rule.
pub fn fourier_bessel_to(
    profile: &RadialProfile,
    k: usize,
    d: usize,
    direction: Direction,
    out: &Rule,
) -> Result<RadialProfile> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} must be at least 2")));
    }
    let s_max = profile.nodes.last().copied().unwrap_or(0.0);
    let r_max = out.nodes.last().copied().unwrap_or(0.0);
    let oscillations = r_max * s_max / (2.0 * std::f64::consts::PI);
    let needed = (NODES_PER_OSCILLATION * oscillations).ceil() as usize;
    if profile.nodes.len() < needed {
        return Err(Error::UnderResolved {
            message: format!(
                "{} nodes for {:.1} oscillations of J_nu over the support",
                profile.nodes.len(),
                oscillations
            ),
            suggested_nodes: needed,
        });
    }
    let nu = bessel_order(k, d);
    let dh = d as f64 / 2.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    let pre = match direction {
        Direction::Forward => two_pi.powf(dh) * i_pow(-(k as i64)),
        Direction::Inverse => two_pi.powf(-dh) * i_pow(k as i64),
    };
    let weighted: Vec<Complex64> = profile
        .nodes
        .iter()
        .zip(&profile.weights)
        .zip(&profile.samples)
        .map(|((s, w), c)| c * (w * s.powf(dh)))
        .collect();
    let samples: Vec<Complex64> = out
        .nodes
        .par_iter()
        .map(|&r| {
            let acc: Complex64 = profile
                .nodes
                .iter()
                .zip(&weighted)
                .map(|(s, c)| c * bessel_j_unchecked(nu, r * s))
                .sum();
            pre * acc * r.powf(-(dh - 1.0))
        })
        .collect();
    RadialProfile::new(out, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_profile(k: usize) -> RadialProfile {
        let rule = resolved_rule(12.0, 144.0);
        RadialProfile::from_fn(&rule, |s| Complex64::new(s.powi(k as i32) * (-s * s / 2.0).exp(), 0.0)).unwrap()
    }

    #[test]
    fn gaussian_is_self_reciprocal() {
        let f = gaussian_profile(0);
        let big = fourier_bessel(&f, 0, 3, Direction::Forward).unwrap();
        let expected = f.scale(Complex64::new((2.0 * std::f64::consts::PI).powf(1.5), 0.0));
        assert!(big.relative_error(&expected, 3) < 1e-6);
    }

    #[test]
    fn inverse_undoes_forward() {
        let f = gaussian_profile(2);
        let big = fourier_bessel(&f, 2, 5, Direction::Forward).unwrap();
        let back = fourier_bessel(&big, 2, 5, Direction::Inverse).unwrap();
        assert!(back.relative_error(&f, 5) < 1e-8);
    }

    #[test]
    fn under_resolution_is_reported() {
        let rule = composite_gauss(0.0, 20.0, 2, 8);
        let f = RadialProfile::from_fn(&rule, |s| Complex64::new((-s).exp(), 0.0)).unwrap();
        match fourier_bessel(&f, 0, 3, Direction::Forward) {
            Err(Error::UnderResolved { suggested_nodes, .. }) => assert!(suggested_nodes > 16),
            other => panic!("expected under-resolution, got {other:?}"),
        }
    }

    #[test]
    fn i_pow_cycle() {
        assert_eq!(i_pow(-1), Complex64::new(0.0, -1.0));
        assert_eq!(i_pow(6), Complex64::new(-1.0, 0.0));
    }
}

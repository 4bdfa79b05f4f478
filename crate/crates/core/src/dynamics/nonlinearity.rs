use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Exponent `p = (d+2)/(d-2)` of the energy-critical power in dimension `d`.
pub fn critical_exponent(d_param: f64) -> Result<f64> {
    if !(d_param > 2.0) || !d_param.is_finite() {
        return Err(Error::InvalidArgument(format!("d_param must exceed 2, got {d_param}")));
    }
    Ok((d_param + 2.0) / (d_param - 2.0))
}

/// `z|z|^{p-1}`.
#[inline]
pub fn power(z: Complex64, p: f64) -> Complex64 {
    let x = z.norm_sqr();
    if x == 0.0 {
        return Complex64::default();
    }
    z * x.powf(0.5 * (p - 1.0))
}

/// Pointwise `g(u) = u|u|^{p-1}`.
pub fn g_eval(u: &Field, p: f64) -> Field {
    u.map(|z| power(z, p))
}

/// The truncated power `φ_n` together with its derivatives.
///
/// `φ_n'(x) = min(x^a, (2n)^{p-1})` with `a = (p-1)/2`, so the regularized
/// nonlinearity `g_n(u) = u φ_n'(|u|²)` agrees with the pure power whenever
/// `|u| ≤ 2n` and grows linearly beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizedNonlinearity {
    pub n: u32,
    pub p: f64,
    #[serde(default = "one")]
    pub strength: f64,
}

fn one() -> f64 {
    1.0
}

impl RegularizedNonlinearity {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("truncation level n must be positive".into()));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent p must exceed 1, got {p}")));
        }
        Ok(RegularizedNonlinearity { n, p, strength: 1.0 })
    }

    pub fn for_dimension(n: u32, d_param: f64) -> Result<Self> {
        Self::new(n, critical_exponent(d_param)?)
    }

    /// Scales the nonlinear term; `0` gives the free flow.
    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    fn a(&self) -> f64 {
        0.5 * (self.p - 1.0)
    }

    /// `4n²`, where the profile saturates.
    pub fn saturation_point(&self) -> f64 {
        let n = self.n as f64;
        4.0 * n * n
    }

    /// `(2n)^{p-1}`, the saturated value of `φ_n'`.
    pub fn saturation_value(&self) -> f64 {
        (2.0 * self.n as f64).powf(self.p - 1.0)
    }

    pub fn phi(&self, x: f64) -> f64 {
        let a = self.a();
        let xs = self.saturation_point();
        if x <= xs {
            x.powf(a + 1.0) / (a + 1.0)
        } else {
            xs.powf(a + 1.0) / (a + 1.0) + self.saturation_value() * (x - xs)
        }
    }

    pub fn dphi(&self, x: f64) -> f64 {
        if x >= self.saturation_point() {
            self.saturation_value()
        } else if x <= 0.0 {
            0.0
        } else {
            x.powf(self.a())
        }
    }

    pub fn ddphi(&self, x: f64) -> f64 {
        if x >= self.saturation_point() || x <= 0.0 {
            0.0
        } else {
            let a = self.a();
            a * x.powf(a - 1.0)
        }
    }

    /// `g_n(z) = strength · z φ_n'(|z|²)`.
    #[inline]
    pub fn g_n(&self, z: Complex64) -> Complex64 {
        z * (self.strength * self.dphi(z.norm_sqr()))
    }

    /// `(∂_z g_n, ∂_{z̄} g_n)` at `z`, without the strength factor.
    pub fn chain_derivatives(&self, z: Complex64) -> (Complex64, Complex64) {
        let x = z.norm_sqr();
        let dd = self.ddphi(x);
        (Complex64::new(self.dphi(x) + x * dd, 0.0), z * z * dd)
    }

    /// `e_n(x) = (p-1)φ_n'(x) - 2xφ_n''(x)`.
    ///
    /// Evaluated branch by branch so it is exactly zero below saturation.
    pub fn e_n(&self, x: f64) -> f64 {
        if x < self.saturation_point() {
            0.0
        } else {
            (self.p - 1.0) * self.saturation_value()
        }
    }

    /// Largest phase `strength·φ_n'(|u|²)` over a field.
    pub fn max_rate(&self, u: &[Complex64]) -> f64 {
        let m = u.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        (self.strength * self.dphi(m)).abs()
    }
}

/// Pointwise `g_n(u)`.
pub fn g_n_eval(u: &Field, reg: &RegularizedNonlinearity) -> Field {
    u.map(|z| reg.g_n(z))
}

/// Pointwise `e_n(|u|²)`.
pub fn e_n_eval(u: &Field, reg: &RegularizedNonlinearity) -> Field {
    u.map(|z| Complex64::new(reg.e_n(z.norm_sqr()), 0.0))
}

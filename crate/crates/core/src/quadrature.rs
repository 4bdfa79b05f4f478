//! Gauss–Legendre rules and uniform-sample time quadratures.

use crate::error::{Error, Result};

/// A quadrature rule `∫ f ≈ Σ w_q f(x_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Composite Gauss–Legendre with `panels` equal panels of `order` nodes on `[a, b]`.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Rule {
    let base = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}

/// Composite trapezoid weights for `n` uniform samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => {
            let mut w = vec![h; n];
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
            w
        }
    }
}

/// Composite Simpson weights; an odd number of intervals closes with the 3/8 rule.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::TooFewSnapshots(n, 3));
    }
    let intervals = n - 1;
    let mut w = vec![0.0; n];
    let even = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    let mut i = 0;
    while i < even {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if even < intervals {
        for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[even + k] += 3.0 * h / 8.0 * c;
        }
    }
    Ok(w)
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    trapezoid_weights(values.len(), h).iter().zip(values).map(|(w, v)| w * v).sum()
}

pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    Ok(simpson_weights(values.len(), h)?.iter().zip(values).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_polynomials() {
        for n in 1..20 {
            let rule = gauss_legendre(n);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_gauss_integrates_gaussian() {
        let rule = composite_gauss(0.0, 10.0, 10, 12);
        let got = rule.integrate(|x| (-x * x).exp());
        assert!((got - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_cubic_exact_even_and_odd() {
        for n in [3, 4, 5, 8, 11] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h).unwrap() - 0.25).abs() < 1e-14, "n={n}");
        }
        assert!(simpson(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn trapezoid_linear_exact() {
        let v: Vec<f64> = (0..7).map(|i| 2.0 * i as f64 * 0.5 + 1.0).collect();
        assert!((trapezoid(&v, 0.5) - 12.0).abs() < 1e-14);
    }
}

//! Orthonormal harmonic bases on `S¹` and `S²`, sphere quadrature, and the
//! angular decomposition of a field's Fourier transform.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::quadrature::{gauss_legendre, Rule};
use crate::radial::RadialProfile;

/// Number of basis elements of degree `k` on `S^{dim−1}`.
pub fn basis_count(dim: usize, k: usize) -> usize {
    match dim {
        1 => usize::from(k == 0),
        2 => {
            if k == 0 {
                1
            } else {
                2
            }
        }
        3 => 2 * k + 1,
        _ => panic!("no explicit basis for dimension {dim}"),
    }
}

/// All `(k, l)` with `k ≤ k_max`, `l` running from 1.
pub fn basis_indices(dim: usize, k_max: usize) -> Vec<(usize, usize)> {
    (0..=k_max)
        .flat_map(|k| (1..=basis_count(dim, k)).map(move |l| (k, l)))
        .collect()
}

/// Fully normalized associated Legendre values `P̄_k^m(z)` for `0 ≤ m ≤ k ≤ k_max`,
/// with `∫_{S²} |P̄_k^m(cos θ) e^{imφ}|² = 2π(2 − δ_{m0})^{-1}·…` folded so that the
/// real harmonics below are orthonormal. Indexed `[k][m]`.
fn legendre_table(k_max: usize, z: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - z * z).max(0.0).sqrt();
    let mut p = vec![vec![0.0; k_max + 1]; k_max + 1];
    p[0][0] = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 1..=k_max {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..k_max {
        p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * z * p[m][m];
    }
    for m in 0..=k_max {
        for k in (m + 2)..=k_max {
            let kf = k as f64;
            let mf = m as f64;
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0).powi(2) - mf * mf) / (4.0 * (kf - 1.0).powi(2) - 1.0)).sqrt();
            p[k][m] = a * (z * p[k - 1][m] - b * p[k - 2][m]);
        }
    }
    p
}

/// Every `b_{k,l}(θ)` for `k ≤ k_max` at a unit vector, in [`basis_indices`] order.
pub fn basis_values(dim: usize, k_max: usize, theta: [f64; 3]) -> Vec<f64> {
    match dim {
        1 => vec![std::f64::consts::FRAC_1_SQRT_2],
        2 => {
            let phi = theta[1].atan2(theta[0]);
            let mut out = Vec::with_capacity(2 * k_max + 1);
            out.push(1.0 / (2.0 * std::f64::consts::PI).sqrt());
            let c = 1.0 / std::f64::consts::PI.sqrt();
            for k in 1..=k_max {
                let (s, co) = (k as f64 * phi).sin_cos();
                out.push(c * co);
                out.push(c * s);
            }
            out
        }
        3 => {
            let z = theta[2].clamp(-1.0, 1.0);
            let phi = theta[1].atan2(theta[0]);
            let p = legendre_table(k_max, z);
            let mut out = Vec::with_capacity((k_max + 1) * (k_max + 1));
            let r2 = std::f64::consts::SQRT_2;
            for (k, row) in p.iter().enumerate() {
                // l = 1..2k+1 ↔ m = l − k − 1
                for l in 1..=(2 * k + 1) {
                    let m = l as i64 - k as i64 - 1;
                    let am = m.unsigned_abs() as usize;
                    let v = match m.cmp(&0) {
                        std::cmp::Ordering::Equal => row[0],
                        std::cmp::Ordering::Greater => r2 * row[am] * (am as f64 * phi).cos(),
                        std::cmp::Ordering::Less => r2 * row[am] * (am as f64 * phi).sin(),
                    };
                    out.push(v);
                }
            }
            out
        }
        _ => panic!("no explicit basis for dimension {dim}"),
    }
}

/// A single basis element `b_{k,l}(θ)`.
pub fn basis_eval(dim: usize, k: usize, l: usize, theta: [f64; 3]) -> f64 {
    let offset: usize = (0..k).map(|kk| basis_count(dim, kk)).sum();
    basis_values(dim, k, theta)[offset + l - 1]
}

/// Quadrature on the unit sphere `S^{dim−1}`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Trapezoid on `S¹` (`n` points) or Gauss–Legendre in `cos θ` × trapezoid in `φ`
    /// on `S²` (`n × 2n` points); exact for harmonics of degree below `n`.
    pub fn new(dim: usize, n: usize) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        match dim {
            2 => {
                let points = (0..n)
                    .map(|i| {
                        let a = two_pi * i as f64 / n as f64;
                        [a.cos(), a.sin(), 0.0]
                    })
                    .collect();
                SphereRule {
                    points,
                    weights: vec![two_pi / n as f64; n],
                }
            }
            3 => {
                let gl: Rule = gauss_legendre(n);
                let nphi = 2 * n;
                let mut points = Vec::with_capacity(n * nphi);
                let mut weights = Vec::with_capacity(n * nphi);
                for (z, w) in gl.nodes.iter().zip(&gl.weights) {
                    let s = (1.0 - z * z).sqrt();
                    for j in 0..nphi {
                        let a = two_pi * j as f64 / nphi as f64;
                        points.push([s * a.cos(), s * a.sin(), *z]);
                        weights.push(w * two_pi / nphi as f64);
                    }
                }
                SphereRule { points, weights }
            }
            _ => panic!("no sphere rule for dimension {dim}"),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `‖b‖_{L^q(S^{dim−1})}` by quadrature.
pub fn basis_lq_norm(dim: usize, k: usize, l: usize, q: f64, rule: &SphereRule) -> f64 {
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| w * basis_eval(dim, k, l, *p).abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Angular coefficients of `ĝ` on radial shells, with the truncation residual.
#[derive(Debug, Clone)]
pub struct AngularDecomposition {
    pub terms: Vec<(usize, usize, RadialProfile)>,
    /// `∫ |ĝ|² dξ` over the radial rule.
    pub total: f64,
    /// `total − Σ_{k ≤ k_max} ‖ĉ_{k,l}‖²`, relative to `total`.
    pub residual: f64,
}

impl AngularDecomposition {
    pub fn coefficient(&self, k: usize, l: usize) -> Option<&RadialProfile> {
        self.terms.iter().find(|(kk, ll, _)| *kk == k && *ll == l).map(|(_, _, c)| c)
    }
}

/// `ĉ_{k,l}(ρ) = ∫_{S^{dim−1}} ĝ(ρθ) b_{k,l}(θ) dθ` on the nodes of `radial`, for any
/// spectral function `ĝ`.
pub fn angular_decompose_fn(
    dim: usize,
    spectrum: impl Fn([f64; 3]) -> Complex64 + Sync,
    radial: &Rule,
    k_max: usize,
    sphere_order: usize,
) -> Result<AngularDecomposition> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("angular decomposition needs dim 2 or 3, got {dim}")));
    }
    if sphere_order <= 2 * k_max {
        return Err(Error::UnderResolved {
            message: format!("sphere rule of order {sphere_order} cannot separate degree {k_max}"),
            suggested_nodes: 2 * k_max + 2,
        });
    }
    let sphere = SphereRule::new(dim, sphere_order);
    let basis: Vec<Vec<f64>> = sphere.points.iter().map(|p| basis_values(dim, k_max, *p)).collect();
    let nb = basis_indices(dim, k_max).len();
    let per_shell: Vec<(Vec<Complex64>, f64)> = radial
        .nodes
        .par_iter()
        .map(|&rho| {
            let mut coeffs = vec![Complex64::default(); nb];
            let mut total = 0.0;
            for ((p, w), b) in sphere.points.iter().zip(&sphere.weights).zip(&basis) {
                let xi = [rho * p[0], rho * p[1], rho * p[2]];
                let g = spectrum(xi);
                total += w * g.norm_sqr();
                for (c, bv) in coeffs.iter_mut().zip(b) {
                    *c += g * (w * bv);
                }
            }
            (coeffs, total)
        })
        .collect();
    let total: f64 = radial
        .nodes
        .iter()
        .zip(&radial.weights)
        .zip(&per_shell)
        .map(|((r, w), (_, t))| w * t * r.powi(dim as i32 - 1))
        .sum();
    let mut terms = Vec::with_capacity(nb);
    let mut captured = 0.0;
    for (idx, (k, l)) in basis_indices(dim, k_max).into_iter().enumerate() {
        let samples = per_shell.iter().map(|(c, _)| c[idx]).collect();
        let profile = RadialProfile::new(radial, samples)?;
        captured += profile.norm_sq(dim);
        terms.push((k, l, profile));
    }
    let residual = if total > 0.0 { ((total - captured) / total).max(0.0) } else { 0.0 };
    Ok(AngularDecomposition { terms, total, residual })
}

/// Angular decomposition of the Fourier transform of a field.
pub fn angular_decompose(field: &Field, radial: &Rule, k_max: usize) -> Result<AngularDecomposition> {
    let order = 2 * k_max + 24;
    angular_decompose_fn(field.grid().dim(), |xi| field.spectral_at(xi), radial, k_max, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_gauss;

    #[test]
    fn orthonormal_bases() {
        for dim in [2, 3] {
            let k_max = 6;
            let rule = SphereRule::new(dim, 2 * k_max + 2);
            let idx = basis_indices(dim, k_max);
            let vals: Vec<Vec<f64>> = rule.points.iter().map(|p| basis_values(dim, k_max, *p)).collect();
            for a in 0..idx.len() {
                for b in 0..idx.len() {
                    let ip: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v[a] * v[b]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-10, "dim {dim} {:?} {:?}: {ip}", idx[a], idx[b]);
                }
            }
        }
    }

    #[test]
    fn single_element_matches_table() {
        let theta = [0.48, -0.6, 0.64];
        let all = basis_values(3, 4, theta);
        let idx = basis_indices(3, 4);
        for (n, (k, l)) in idx.into_iter().enumerate() {
            assert_eq!(basis_eval(3, k, l, theta), all[n]);
        }
    }

    #[test]
    fn parity() {
        let t = [0.3f64, 0.5, (1.0f64 - 0.34).sqrt()];
        let m = [-t[0], -t[1], -t[2]];
        for (n, (k, _)) in basis_indices(3, 5).into_iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((basis_values(3, 5, m)[n] - sign * basis_values(3, 5, t)[n]).abs() < 1e-13);
        }
    }

    #[test]
    fn synthesized_coefficient_is_recovered() {
        let h = |rho: f64| (-(rho - 1.0).powi(2) * 4.0).exp();
        let radial = composite_gauss(0.25, 2.5, 6, 10);
        let dec = angular_decompose_fn(
            3,
            |xi| {
                let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                let th = [xi[0] / rho, xi[1] / rho, xi[2] / rho];
                Complex64::new(h(rho) * basis_eval(3, 2, 1, th), 0.0)
            },
            &radial,
            4,
            16,
        )
        .unwrap();
        for (k, l, c) in &dec.terms {
            for (r, v) in c.nodes.iter().zip(&c.samples) {
                let expect = if (*k, *l) == (2, 1) { h(*r) } else { 0.0 };
                assert!((v.re - expect).abs() < 1e-10 && v.im.abs() < 1e-10);
            }
        }
        assert!(dec.residual < 1e-10);
    }
}

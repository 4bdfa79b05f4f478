//! Smooth cutoff profiles shared by the physical and frequency decompositions.

fn flat_exp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step: 1 for `t ≤ 0`, 0 for `t ≥ 1`, monotone in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = flat_exp(1.0 - t);
        let b = flat_exp(t);
        a / (a + b)
    }
}

/// Radial bump equal to 1 on `r ≤ a` and 0 on `r ≥ 2a`.
pub fn bump(r: f64, a: f64) -> f64 {
    smooth_step((r - a) / a)
}

/// Dyadic low-pass profile `φ(ξ)`: 1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`.
pub fn low_pass(r: f64) -> f64 {
    bump(r, 1.0)
}

/// Dyadic annulus multiplier `φ(ξ/M) − φ(2ξ/M)`, supported in `M/2 ≤ |ξ| ≤ 2M`.
pub fn annulus(r: f64, m: f64) -> f64 {
    low_pass(r / m) - low_pass(2.0 * r / m)
}

use crate::error::{Error, Result};

const ADMISSIBLE_TOLERANCE: f64 = 1e-12;

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `2/q + d/r = d/2` to within `1e-12`.
pub fn admissible_check(q: f64, r: f64, d_param: f64) -> bool {
    if q < 2.0 || r < 2.0 {
        return false;
    }
    (2.0 * inv(q) + d_param * inv(r) - 0.5 * d_param).abs() <= ADMISSIBLE_TOLERANCE
}

/// `(q, r)` pair admissible at dimension `d` with the given time exponent.
pub fn admissible_partner(q: f64, d_param: f64) -> f64 {
    d_param / (0.5 * d_param - 2.0 * inv(q))
}

/// Excluded endpoint `(2, (4d-2)/(2d-3))`.
pub fn gain_endpoint(d_param: f64) -> (f64, f64) {
    (2.0, (4.0 * d_param - 2.0) / (2.0 * d_param - 3.0))
}

/// Supremum `(d-1)/(2d-1)` of the derivative gain, attained only at the excluded endpoint.
pub fn gain_supremum(d_param: f64) -> f64 {
    (d_param - 1.0) / (2.0 * d_param - 1.0)
}

/// Derivative gain `2/q + d/p0 - d/2` of the randomized free evolution.
///
/// Requires `1/q ≤ (d - 1/2)(1/2 - 1/p0)` and `(q, p0)` away from the endpoint.
pub fn derivative_gain(q: f64, p0: f64, d_param: f64) -> Result<f64> {
    let d = d_param;
    if !(q >= 2.0) || !(p0 >= 2.0) || q.is_infinite() || p0.is_infinite() {
        return Err(Error::Constraint(format!("(q, p0) = ({q}, {p0}) must lie in [2, ∞)")));
    }
    let (eq, ep) = gain_endpoint(d);
    if (q - eq).abs() <= 1e-12 && (p0 - ep).abs() <= 1e-12 * ep {
        return Err(Error::Constraint(format!(
            "(q, p0) = (2, (4d-2)/(2d-3)) = (2, {ep}) is the excluded endpoint"
        )));
    }
    let lhs = 1.0 / q;
    let rhs = (d - 0.5) * (0.5 - 1.0 / p0);
    if lhs > rhs + 1e-14 {
        return Err(Error::Constraint(format!(
            "1/q <= (d - 1/2)(1/2 - 1/p0) fails: {lhs} > {rhs}"
        )));
    }
    Ok(2.0 / q + d / p0 - 0.5 * d)
}

/// The `p0` that maximizes the gain for a given `q`: `(1/2 - 2/((2d-1)q))^{-1}` for `q > 2`,
/// and `(4d-2)/(2d-3-δ)` at `q = 2`.
pub fn optimal_p0(q: f64, d_param: f64, delta: f64) -> f64 {
    let d = d_param;
    if q == 2.0 {
        (4.0 * d - 2.0) / (2.0 * d - 3.0 - delta)
    } else {
        1.0 / (0.5 - 2.0 / ((2.0 * d - 1.0) * q))
    }
}

/// Regularity threshold `s_d = max{(4d-1)/(3(2d-1)), (d²+6d-4)/((2d-1)(d+2))}`.
pub fn s_d(d_param: f64) -> f64 {
    let d = d_param;
    let a = (4.0 * d - 1.0) / (3.0 * (2.0 * d - 1.0));
    let b = (d * d + 6.0 * d - 4.0) / ((2.0 * d - 1.0) * (d + 2.0));
    a.max(b)
}

/// Which expression attains `s_d`: `true` for the second (Strichartz) branch.
pub fn s_d_second_branch(d_param: f64) -> bool {
    let d = d_param;
    (d * d + 6.0 * d - 4.0) / ((2.0 * d - 1.0) * (d + 2.0)) >= (4.0 * d - 1.0) / (3.0 * (2.0 * d - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_examples() {
        for d in [3.0, 7.0, 11.0] {
            assert!(admissible_check(f64::INFINITY, 2.0, d));
            assert!(admissible_check(2.0, 2.0 * d / (d - 2.0), d));
        }
        assert!(!admissible_check(2.0, 2.0, 3.0));
        assert!(admissible_check(10.0, admissible_partner(10.0, 3.0), 3.0));
    }

    #[test]
    fn gain_examples() {
        let d = 7.0;
        let s = 0.01;
        let g = derivative_gain(2.0, optimal_p0(2.0, d, s), d).unwrap();
        assert!((g - (6.0 / 13.0 - 0.5 * s * 7.0 / 13.0)).abs() < 1e-14);
        assert!((g - 0.45885).abs() < 1e-5);
        let r = admissible_partner(4.0, d);
        assert!(derivative_gain(4.0, r, d).unwrap().abs() < 1e-14);
        let (q, p0) = gain_endpoint(d);
        assert!(matches!(derivative_gain(q, p0, d), Err(Error::Constraint(_))));
        assert!(matches!(derivative_gain(2.0, 2.1, d), Err(Error::Constraint(_))));
        let q = 5.0;
        let g = derivative_gain(q, optimal_p0(q, d, 0.0), d).unwrap();
        assert!((g - gain_supremum(d) * 2.0 / q).abs() < 1e-14);
    }

    #[test]
    fn thresholds() {
        assert!((s_d(7.0) - 87.0 / 117.0).abs() < 1e-15);
        assert!(s_d_second_branch(7.0));
        assert!(s_d_second_branch(10.0));
        assert!(!s_d_second_branch(11.0));
        assert!((s_d(11.0) - 43.0 / 63.0).abs() < 1e-15);
        let a = 39.0 / 57.0;
        assert!((s_d(10.0) - a).abs() < 1e-15);
    }
}

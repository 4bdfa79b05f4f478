//! Bessel functions of the first kind `J_μ` for real order `μ > -1/2`.
//!
//! Small arguments use the ascending series; larger arguments use Steed's
//! continued-fraction method (CF1 for `J'/J`, CF2 for `p + iq`) with a
//! downward recurrence to fix the normalization.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 100_000;
const SERIES_LIMIT: f64 = 2.0;

/// `J_μ(r)` for `μ > -1/2`, `r ≥ 0`.
pub fn bessel_j(mu: f64, r: f64) -> Result<f64> {
    if !(mu > -0.5) {
        return Err(Error::BesselOrder(mu));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel argument {r} must be finite and nonnegative")));
    }
    Ok(bessel_j_unchecked(mu, r))
}

/// `J_μ(r)` without argument validation; `μ > -1/2` and `r ≥ 0` assumed.
pub fn bessel_j_unchecked(mu: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if mu == 0.0 { 1.0 } else { 0.0 };
    }
    if r < SERIES_LIMIT {
        return series(mu, r);
    }
    if mu < 0.0 {
        // J_μ = 2(μ+1)/r J_{μ+1} − J_{μ+2}
        let (j1, j2) = (steed(mu + 1.0, r), steed(mu + 2.0, r));
        return 2.0 * (mu + 1.0) / r * j1 - j2;
    }
    steed(mu, r)
}

fn series(mu: f64, r: f64) -> f64 {
    let half = 0.5 * r;
    let q = -half * half;
    let mut term = half.powf(mu) / gamma(mu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= q / (k * (k + mu));
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

fn steed(nu: f64, x: f64) -> f64 {
    let nl = (nu - x + 1.5).floor().max(0.0) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / std::f64::consts::PI;

    // CF1: J'_ν/J_ν
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }

    // downward recurrence from ν to μ = ν − nl
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for i in 1..MAXIT {
        a += 2.0 * i as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            break;
        }
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    rjl1 * (rjmu / rjl)
}

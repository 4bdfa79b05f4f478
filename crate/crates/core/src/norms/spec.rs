use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named function spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    LebesgueQr,
    Besov,
    W,
    V,
    Wdot,
    R,
    Rdot,
    X,
    Y,
    Z,
}

impl NormName {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lebesgue" | "lebesgue_qr" => NormName::LebesgueQr,
            "besov" => NormName::Besov,
            "w" => NormName::W,
            "v" => NormName::V,
            "wdot" => NormName::Wdot,
            "r" => NormName::R,
            "rdot" => NormName::Rdot,
            "x" => NormName::X,
            "y" => NormName::Y,
            "z" => NormName::Z,
            other => return Err(Error::InvalidArgument(format!("unknown norm '{other}'"))),
        })
    }
}

/// One `‖∇^deriv ·‖_{L^q_t L^r_x}` term, optionally as an ℓ²-weighted sum over dyadic blocks
/// `(Σ_N N^{2s} ‖P_N ·‖²)^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub q: f64,
    pub r: f64,
    #[serde(default)]
    pub deriv: u8,
    #[serde(default)]
    pub besov_weight: Option<f64>,
}

impl Term {
    pub fn lebesgue(q: f64, r: f64, deriv: u8) -> Self {
        Term { q, r, deriv, besov_weight: None }
    }

    pub fn besov(q: f64, r: f64, weight: f64) -> Self {
        Term { q, r, deriv: 0, besov_weight: Some(weight) }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("q", self.q), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidArgument(format!("exponent {name} = {v} must be at least 1")));
            }
        }
        if self.deriv > 1 {
            return Err(Error::InvalidArgument("derivative order must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Divisibility exponent of the term on its own.
    fn alpha(&self) -> f64 {
        match self.besov_weight {
            Some(_) => self.q.max(2.0),
            None => self.q,
        }
    }
}

/// A (possibly composite) space-time norm: the sum of its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub name: NormName,
    pub d_param: f64,
    pub terms: Vec<Term>,
}

fn check_d(d: f64, min: f64) -> Result<()> {
    if !(d > min) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("d_param must exceed {min}, got {d}")));
    }
    Ok(())
}

/// Exponent pair of `V`.
pub fn v_pair(d: f64) -> (f64, f64) {
    (2.0 * (d + 2.0) / (d - 2.0), 2.0 * d * (d + 2.0) / (d * d + 4.0))
}

/// Exponent pair of the Besov component of `R` and of `X`.
pub fn x_pair(d: f64) -> (f64, f64) {
    (d + 2.0, 2.0 * (d + 2.0) / d)
}

/// Exponent pair of `Y`.
pub fn y_pair(d: f64) -> (f64, f64) {
    ((d + 2.0) / 3.0, 2.0 * (d + 2.0) / (d + 4.0))
}

impl NormSpec {
    pub fn new(name: NormName, d_param: f64, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("norm without terms".into()));
        }
        for t in &terms {
            t.validate()?;
        }
        Ok(NormSpec { name, d_param, terms })
    }

    pub fn lebesgue(q: f64, r: f64, deriv: u8) -> Result<Self> {
        NormSpec::new(NormName::LebesgueQr, f64::NAN, vec![Term::lebesgue(q, r, deriv)])
    }

    pub fn besov(q: f64, r: f64, weight: f64) -> Result<Self> {
        NormSpec::new(NormName::Besov, f64::NAN, vec![Term::besov(q, r, weight)])
    }

    /// The named spaces at analytic dimension `d_param`; `sigma` only enters `Z`.
    pub fn named(name: NormName, d_param: f64, sigma: f64) -> Result<Self> {
        check_d(d_param, 2.0)?;
        let d = d_param;
        let (vq, vr) = v_pair(d);
        let (xq, xr) = x_pair(d);
        let weight = 4.0 / (d + 2.0);
        let terms = match name {
            NormName::V => vec![Term::lebesgue(vq, vr, 0)],
            NormName::Wdot => vec![Term::lebesgue(vq, vr, 1)],
            NormName::W => vec![Term::lebesgue(vq, vr, 0), Term::lebesgue(vq, vr, 1)],
            NormName::R => vec![
                Term::lebesgue(vq, vr, 0),
                Term::lebesgue(vq, vr, 1),
                Term::besov(xq, xr, weight),
            ],
            NormName::Rdot => vec![Term::lebesgue(vq, vr, 1), Term::besov(xq, xr, weight)],
            NormName::X => vec![Term::besov(xq, xr, weight)],
            NormName::Y => {
                let (yq, yr) = y_pair(d);
                vec![Term::besov(yq, yr, weight)]
            }
            NormName::Z => return Self::z(d, sigma),
            NormName::LebesgueQr | NormName::Besov => {
                return Err(Error::InvalidArgument("generic norms need explicit exponents".into()))
            }
        };
        NormSpec::new(name, d, terms)
    }

    /// The five-term `Z` norm.
    pub fn z(d: f64, sigma: f64) -> Result<Self> {
        check_d(d, 6.0)?;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidArgument(format!("sigma = {sigma} outside the admissible range")));
        }
        let s = sigma;
        let terms = vec![
            Term::lebesgue(1.0 / s, 2.0 * d / (d - 4.0 * s), 0),
            Term::lebesgue(2.0, (4.0 * d - 2.0) / (2.0 * d - 3.0 - s), 1),
            Term::lebesgue(2.0, 2.0 * d * (2.0 * d - 1.0) / (2.0 * d * d - 7.0 * d + 4.0 + d * s), 1),
            Term::lebesgue(1.0, 2.0 * d / (d - 4.0), 1),
            Term::lebesgue((d - 2.0) / (d - 2.0 - 4.0 * s), 2.0 * d * (d - 2.0) / (d * (d - 6.0) + 16.0 * s), 1),
        ];
        for t in &terms {
            if !(t.q.is_finite() && t.r.is_finite() && t.q >= 1.0 && t.r >= 1.0) {
                return Err(Error::Constraint(format!("Z exponent pair ({}, {}) degenerate", t.q, t.r)));
            }
        }
        NormSpec::new(NormName::Z, d, terms)
    }

    /// Principal (first) term exponents.
    pub fn q(&self) -> f64 {
        self.terms[0].q
    }

    pub fn r(&self) -> f64 {
        self.terms[0].r
    }

    pub fn deriv(&self) -> u8 {
        self.terms[0].deriv
    }

    pub fn besov_weight(&self) -> Option<f64> {
        self.terms.iter().find_map(|t| t.besov_weight)
    }

    /// Divisibility exponent `α(S)`: the largest time exponent over the terms.
    /// `None` when a term is `L^∞_t`, which is not divisible.
    pub fn alpha(&self) -> Option<f64> {
        let a = self.terms.iter().map(Term::alpha).fold(0.0, f64::max);
        a.is_finite().then_some(a)
    }
}

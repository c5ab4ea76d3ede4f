//! Exact rational arithmetic and small helpers shared by every other module.
//!
//! All scalars in the crate (weights, heights, coordinates, breakpoints) are
//! [`Rational`] values backed by arbitrary-precision integers. Fractions are
//! kept in lowest terms with a positive denominator by construction, so
//! structural equality is value equality.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// The universal scalar type: an exact fraction of arbitrary-precision integers.
pub type Rational = BigRational;

/// Errors raised by the numeric helpers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("geometric ratio {0} has absolute value >= 1")]
    DivergentRatio(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Builds `p/q` from machine integers. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `1 / 2^n`.
pub fn inv_pow2(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

/// `1 / 4^n`.
pub fn inv_pow4(n: u32) -> Rational {
    inv_pow2(2 * n)
}

/// True when the reduced denominator is a power of two.
pub fn is_dyadic(x: &Rational) -> bool {
    let d = x.denom();
    let bits = d.bits();
    bits > 0 && (d.clone() & (d.clone() - BigInt::one())).is_zero()
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, NumericsError> {
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| NumericsError::Parse(s.to_string()))?;
    let q: BigInt = q.parse().map_err(|_| NumericsError::Parse(s.to_string()))?;
    if q.is_zero() {
        return Err(NumericsError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(p, q))
}

/// A geometric series `a + a r + a r^2 + ...` with `|r| < 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricTail {
    pub first_term: Rational,
    pub ratio: Rational,
}

impl GeometricTail {
    pub fn new(first_term: Rational, ratio: Rational) -> Self {
        Self { first_term, ratio }
    }

    /// Sum of the first `n` terms.
    pub fn partial_sum(&self, n: usize) -> Rational {
        let mut term = self.first_term.clone();
        let mut acc = Rational::zero();
        for _ in 0..n {
            acc += &term;
            term *= &self.ratio;
        }
        acc
    }
}

impl fmt::Display for GeometricTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * sum ({})^k", format_rational(&self.first_term), format_rational(&self.ratio))
    }
}

/// Exact closed-form value `a / (1 - r)` of a convergent geometric series.
pub fn sum_geometric_tail(tail: &GeometricTail) -> Result<Rational, NumericsError> {
    if tail.ratio.abs() >= Rational::one() {
        return Err(NumericsError::DivergentRatio(format_rational(&tail.ratio)));
    }
    Ok(&tail.first_term / (Rational::one() - &tail.ratio))
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

//! Exact rational scalars and their canonical `p/q` text form.

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational; `num::BigRational` keeps the canonical
/// form (positive denominator, reduced) on every operation.
pub type Rat = num::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal `{0}`")]
    BadInteger(String),
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
}

/// Rational from a small integer pair; panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p` or `p/q` (optionally signed) into a canonical rational.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| RatParseError::BadInteger(s.to_string()))?;
    let den: BigInt = match den_str {
        Some(d) => d
            .parse()
            .map_err(|_| RatParseError::BadInteger(s.to_string()))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(RatParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Canonical text form: `p` for integers, `p/q` otherwise (q > 0, reduced).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_unit_interval(r: &Rat) -> bool {
    !r.is_negative() && *r <= Rat::one()
}

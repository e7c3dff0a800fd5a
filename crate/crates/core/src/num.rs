//! Exact scalar type and its text encoding.
//!
//! Every decision in the crate is made over [`Rational`]. The text form is
//! `p/q` or a bare integer; decimal notation is rejected so that a value read
//! from disk is exactly the value that was written.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision fraction, always normalized with a positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{text}`: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `p/q`, `-p/q` or an integer. Whitespace, decimals and exponents are errors.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        text: text.to_string(),
        reason,
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let parse_int = |s: &str, allow_sign: bool| -> Result<BigInt, ParseRationalError> {
        let digits = match s.strip_prefix('-') {
            Some(rest) if allow_sign => rest,
            Some(_) => return Err(err("denominator must be unsigned")),
            None => s,
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected an integer or p/q with decimal digits"));
        }
        s.parse::<BigInt>()
            .map_err(|_| err("expected an integer or p/q with decimal digits"))
    };
    let n = parse_int(num, true)?;
    let d = match den {
        Some(d) => parse_int(d, false)?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Canonical text form: `p/q` in lowest terms, or `p` when the denominator is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(zero(), |acc, v| acc + v)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(zero(), |acc, (x, y)| acc + x * y)
}

pub fn max_abs(values: &[Rational]) -> Rational {
    values.iter().map(|v| v.abs()).max().unwrap_or_else(zero)
}

//! Arithmetic modes.
//!
//! Every map, interval and diagram is generic over a [`Scalar`]. Two
//! implementations exist: [`Rational`] (arbitrary-precision, exact) and
//! `f64` (comparisons use [`EPS`]). Exact mode is used whenever all map
//! parameters are rational, which makes vertex deduplication and periodic
//! integrals exact.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Comparison epsilon in float mode.
pub const EPS: f64 = 1e-12;

/// Endpoint tolerance used when deduplicating diagram vertices in float mode.
pub const DEDUP_TOL: f64 = 1e-10;

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact conversion of a finite float (every finite `f64` is a dyadic rational).
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Equality: exact in rational mode, within `tol` in float mode.
    fn near(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }

    /// `hi - lo` is strictly positive (beyond [`EPS`] in float mode).
    fn gap_positive(lo: &Self, hi: &Self) -> bool {
        if Self::EXACT {
            hi > lo
        } else {
            hi.to_f64() - lo.to_f64() > EPS
        }
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_zero_value(&self) -> bool {
        self.near(&Self::zero(), EPS)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // very large numerators/denominators: scale down before dividing
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

pub fn smin<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn smax<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumberError {
    #[error("cannot parse number literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("irrational value {0} cannot be represented in exact mode")]
    NotRational(String),
}

/// A parsed numeric literal: either an exact rational (`p/q` or a decimal)
/// or an irrational constant such as `golden`.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Rational(Rational),
    Real(f64),
}

impl Number {
    pub fn golden() -> Self {
        Number::Real((1.0 + 5f64.sqrt()) / 2.0)
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Number::Rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn int(n: i64) -> Self {
        Number::Rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => Scalar::to_f64(r),
            Number::Real(x) => *x,
        }
    }

    pub fn to_scalar<S: Scalar>(&self) -> Result<S, NumberError> {
        match self {
            Number::Rational(r) => Ok(S::from_rational(r)),
            Number::Real(x) if !S::EXACT => Ok(S::from_f64(*x).expect("finite literal")),
            Number::Real(x) => Err(NumberError::NotRational(x.to_string())),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => write!(f, "{r}"),
            Number::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Number {
    type Err = NumberError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim();
        match s {
            "golden" | "phi" => return Ok(Number::golden()),
            _ => {}
        }
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_decimal(p.trim()).ok_or_else(|| NumberError::Malformed(raw.into()))?;
            let q = parse_decimal(q.trim()).ok_or_else(|| NumberError::Malformed(raw.into()))?;
            if q.is_zero() {
                return Err(NumberError::ZeroDenominator(raw.into()));
            }
            return Ok(Number::Rational(p / q));
        }
        parse_decimal(s)
            .map(Number::Rational)
            .ok_or_else(|| NumberError::Malformed(raw.into()))
    }
}

/// Parses `[-+]digits[.digits][e[-+]digits]` exactly.
fn parse_decimal(s: &str) -> Option<Rational> {
    if s.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        value = -value;
    }
    Some(value)
}

/// Renders a scalar for reports: exact rationals as `p/q`, floats with full precision.
pub fn render<S: Scalar>(x: &S) -> String {
    let s = x.to_string();
    if S::EXACT {
        s
    } else {
        format!("{:.17}", x.to_f64()).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals_exactly() {
        assert_eq!("9/5".parse::<Number>().unwrap(), Number::ratio(9, 5));
        assert_eq!("1.8".parse::<Number>().unwrap(), Number::ratio(9, 5));
        assert_eq!("0.3".parse::<Number>().unwrap(), Number::ratio(3, 10));
        assert_eq!("-2".parse::<Number>().unwrap(), Number::int(-2));
        assert_eq!("1.5e-1".parse::<Number>().unwrap(), Number::ratio(3, 20));
        assert_eq!(".5".parse::<Number>().unwrap(), Number::ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!("abc".parse::<Number>().is_err());
        assert!("1/0".parse::<Number>().is_err());
        assert!("".parse::<Number>().is_err());
        assert!("1.2.3".parse::<Number>().is_err());
    }

    #[test]
    fn golden_is_not_exact() {
        let g: Number = "golden".parse().unwrap();
        assert!(!g.is_rational());
        assert!(g.to_scalar::<Rational>().is_err());
        let x: f64 = g.to_scalar().unwrap();
        assert!((x * x - x - 1.0).abs() < 1e-15);
    }

    #[test]
    fn near_is_exact_for_rationals() {
        let a = Rational::from_ratio(1, 3);
        let b = Rational::from_ratio(1, 3) + Rational::from_ratio(1, 1_000_000_000_000_000);
        assert!(!a.near(&b, 1e-3));
        assert!((1.0f64 / 3.0).near(&(1.0 / 3.0 + 1e-14), 1e-12));
    }
}

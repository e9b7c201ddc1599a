//! Scalar codomain of set functions.
//!
//! A [`Value`] is either an exact arbitrary-precision rational or an
//! approximate `f64` compared under a [`Tolerance`]. The two never mix: any
//! arithmetic or comparison across modes is an [`Error::MixedMode`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Environment variable overriding the default approximate-mode tolerance.
pub const EPSILON_ENV: &str = "SUBJACCARD_EPSILON";

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(Tolerance(epsilon))
        } else {
            Err(Error::InvalidNumber(format!(
                "tolerance must be positive, got {epsilon}"
            )))
        }
    }

    /// Reads [`EPSILON_ENV`], falling back to [`DEFAULT_EPSILON`] when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(EPSILON_ENV) {
            Ok(s) => {
                let eps: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidNumber(s.clone()))?;
                Tolerance::new(eps)
            }
            Err(_) => Ok(Tolerance::default()),
        }
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Value {
        Value::Exact(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn zero(mode: Mode) -> Value {
        match mode {
            Mode::Exact => Value::Exact(BigRational::zero()),
            Mode::Approx => Value::Approx(0.0),
        }
    }

    pub fn one(mode: Mode) -> Value {
        match mode {
            Mode::Exact => Value::Exact(BigRational::one()),
            Mode::Approx => Value::Approx(1.0),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Value::Exact(_) => Mode::Exact,
            Value::Approx(_) => Mode::Approx,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Approx(x) => *x,
        }
    }

    fn zip<R>(
        &self,
        other: &Value,
        exact: impl FnOnce(&BigRational, &BigRational) -> R,
        approx: impl FnOnce(f64, f64) -> R,
    ) -> Result<R> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Ok(exact(a, b)),
            (Value::Approx(a), Value::Approx(b)) => Ok(approx(*a, *b)),
            _ => Err(Error::MixedMode),
        }
    }

    pub fn checked_add(&self, other: &Value) -> Result<Value> {
        self.zip(
            other,
            |a, b| Value::Exact(a + b),
            |a, b| Value::Approx(a + b),
        )
    }

    pub fn checked_sub(&self, other: &Value) -> Result<Value> {
        self.zip(
            other,
            |a, b| Value::Exact(a - b),
            |a, b| Value::Approx(a - b),
        )
    }

    pub fn checked_mul(&self, other: &Value) -> Result<Value> {
        self.zip(
            other,
            |a, b| Value::Exact(a * b),
            |a, b| Value::Approx(a * b),
        )
    }

    pub fn checked_div(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Exact(_), Value::Exact(b)) if b.is_zero() => Err(Error::DivisionByZero),
            _ => self.zip(
                other,
                |a, b| Value::Exact(a / b),
                |a, b| Value::Approx(a / b),
            ),
        }
    }

    /// Three-way comparison; approximate values within `tol` compare equal.
    pub fn compare(&self, other: &Value, tol: Tolerance) -> Result<Ordering> {
        self.zip(
            other,
            |a, b| a.cmp(b),
            |a, b| {
                if (a - b).abs() <= tol.0 {
                    Ordering::Equal
                } else {
                    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                }
            },
        )
    }

    pub fn is_zero(&self, tol: Tolerance) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Approx(x) => x.abs() <= tol.0,
        }
    }

    pub fn is_negative(&self, tol: Tolerance) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Approx(x) => *x < -tol.0,
        }
    }
}

impl fmt::Display for Value {
    /// Exact values render as `p/q` (or `p` for integers) and never contain
    /// a decimal point; approximate values always carry one or an exponent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for Value {
    type Err = Error;

    /// Inverse of `Display`: a decimal point, exponent, `inf` or `NaN` marks
    /// an approximate value.
    fn from_str(s: &str) -> Result<Value> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if lower.contains('.')
            || lower.contains('e')
            || lower.contains("inf")
            || lower.contains("nan")
        {
            t.parse::<f64>()
                .map(Value::Approx)
                .map_err(|_| Error::InvalidNumber(s.to_string()))
        } else {
            parse_exact(t).map(Value::Exact)
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses an exact rational from an integer (`-3`), a `p/q` fraction, or a
/// decimal with optional exponent (`0.25`, `1.5e-3`).
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidNumber(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| bad())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Arithmetic used by the verification kernels, implemented for both
/// scalar modes so the hot loops are monomorphized per mode.
pub(crate) trait Scalar: Clone + Send + Sync + fmt::Debug + 'static {
    /// Exact scalars are worth pre-screening with an `f64` filter.
    const EXACT: bool;
    fn nil() -> Self;
    fn unit() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_nil(&self, tol: Tolerance) -> bool;
    fn is_below_zero(&self, tol: Tolerance) -> bool;
    /// `self > other`, beyond `tol` in approximate mode.
    fn exceeds(&self, other: &Self, tol: Tolerance) -> bool;
    fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool;
    fn as_f64(&self) -> f64;
    fn into_value(self) -> Value;
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_nil(&self, _: Tolerance) -> bool {
        Zero::is_zero(self)
    }
    fn is_below_zero(&self, _: Tolerance) -> bool {
        Signed::is_negative(self)
    }
    fn exceeds(&self, other: &Self, _: Tolerance) -> bool {
        self > other
    }
    fn approx_eq(&self, other: &Self, _: Tolerance) -> bool {
        self == other
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn into_value(self) -> Value {
        Value::Exact(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_nil(&self, tol: Tolerance) -> bool {
        self.abs() <= tol.0
    }
    fn is_below_zero(&self, tol: Tolerance) -> bool {
        *self < -tol.0
    }
    fn exceeds(&self, other: &Self, tol: Tolerance) -> bool {
        self - other > tol.0
    }
    fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        (self - other).abs() <= tol.0
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn into_value(self) -> Value {
        Value::Approx(self)
    }
}

//! Finite number types the solvers are generic over.
//!
//! Three modes are supported: exact 64-bit integers with checked arithmetic,
//! exact big rationals, and IEEE doubles compared within a tolerance. The
//! exact modes ignore the tolerance argument of [`Scalar::tied`] and
//! [`Scalar::exceeds`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default tolerance for float mode.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumMode {
    Int,
    Rat,
    Float,
}

impl NumMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NumMode::Int => "int",
            NumMode::Rat => "rat",
            NumMode::Float => "float",
        }
    }
}

impl FromStr for NumMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" => Ok(NumMode::Int),
            "rat" => Ok(NumMode::Rat),
            "float" => Ok(NumMode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for NumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub trait Scalar: Clone + Ord + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const MODE: NumMode;

    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn checked_add(&self, other: &Self) -> Option<Self>;
    fn checked_sub(&self, other: &Self) -> Option<Self>;
    fn checked_mul_int(&self, k: i64) -> Option<Self>;
    fn checked_neg(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    /// `2^e`, or `ExponentOverflow` when the mode cannot hold it exactly.
    fn pow2(e: u32) -> Result<Self>;

    /// Equality as used for tightness tests.
    fn tied(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    /// `self > other`, beyond the tolerance in float mode.
    fn exceeds(&self, other: &Self, _tol: f64) -> bool {
        self > other
    }

    fn checked_abs(&self) -> Option<Self> {
        if *self < Self::zero() {
            self.checked_neg()
        } else {
            Some(self.clone())
        }
    }

    fn is_positive(&self, tol: f64) -> bool {
        self.exceeds(&Self::zero(), tol)
    }
}

impl Scalar for i64 {
    const MODE: NumMode = NumMode::Int;

    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        i64::checked_add(*self, *other)
    }
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        i64::checked_sub(*self, *other)
    }
    fn checked_mul_int(&self, k: i64) -> Option<Self> {
        i64::checked_mul(*self, k)
    }
    fn checked_neg(&self) -> Option<Self> {
        i64::checked_neg(*self)
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn pow2(e: u32) -> Result<Self> {
        if e > 62 {
            return Err(Error::ExponentOverflow { exponent: e });
        }
        Ok(1i64 << e)
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_i64()
            .ok_or_else(|| Error::Parse(format!("expected an integer, got {v}")))
    }
}

/// A finite double with a total order. NaN and infinities are rejected at
/// construction; arithmetic that would produce them reports overflow.
#[derive(Debug, Clone, Copy)]
pub struct Float(f64);

impl Float {
    pub fn new(v: f64) -> Option<Self> {
        v.is_finite().then_some(Float(v))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Float {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Float {}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Float {
    fn cmp(&self, other: &Self) -> Ordering {
        // -0.0 and 0.0 compare equal
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.0.total_cmp(&other.0)
        }
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Scalar for Float {
    const MODE: NumMode = NumMode::Float;

    fn zero() -> Self {
        Float(0.0)
    }
    fn from_i64(v: i64) -> Self {
        Float(v as f64)
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        Float::new(self.0 + other.0)
    }
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        Float::new(self.0 - other.0)
    }
    fn checked_mul_int(&self, k: i64) -> Option<Self> {
        Float::new(self.0 * k as f64)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(Float(-self.0))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn to_json(&self) -> Value {
        Value::from(self.0)
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .and_then(Float::new)
            .ok_or_else(|| Error::Parse(format!("expected a finite number, got {v}")))
    }
    fn pow2(e: u32) -> Result<Self> {
        // doubles hold powers of two exactly up to the exponent range
        if e > 1023 {
            return Err(Error::ExponentOverflow { exponent: e });
        }
        Ok(Float(2f64.powi(e as i32)))
    }
    fn tied(&self, other: &Self, tol: f64) -> bool {
        (self.0 - other.0).abs() <= tol
    }
    fn exceeds(&self, other: &Self, tol: f64) -> bool {
        self.0 > other.0 + tol
    }
}

impl Scalar for BigRational {
    const MODE: NumMode = NumMode::Rat;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn checked_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn checked_mul_int(&self, k: i64) -> Option<Self> {
        Some(self * BigRational::from_integer(BigInt::from(k)))
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn checked_abs(&self) -> Option<Self> {
        Some(self.abs())
    }
    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn pow2(e: u32) -> Result<Self> {
        Ok(BigRational::from_integer(BigInt::from(1) << e))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(<Self as Scalar>::from_i64)
                .ok_or_else(|| Error::Parse(format!("rational entries must be integers or strings, got {n}"))),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("expected a rational, got {other}"))),
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

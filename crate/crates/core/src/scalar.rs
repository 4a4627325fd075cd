//! Scalar backends.
//!
//! Two fields are supported and never mixed inside one complex: exact
//! rationals ([`Rational`]) for synthetic complexes, and double precision
//! complex numbers ([`Complex64`]) for complexes twisted by unitary
//! representations, where entries are not rational.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Default relative tolerance for complex-float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Absolute value of a scalar. Exact for rationals, `f64` for complex floats.
pub trait Magnitude: Clone + Debug + PartialEq + PartialOrd + Send + Sync + 'static {
    fn one() -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Square root when it can be represented without rounding.
    fn sqrt_exact(&self) -> Option<Self>;
    fn to_json(&self) -> Value;

    fn recip(&self) -> Self {
        Self::one().div(self)
    }

    /// `self` for even `exponent_parity`, `1/self` for odd.
    fn alternating(&self, degree: usize) -> Self {
        if degree.is_multiple_of(2) {
            self.clone()
        } else {
            self.recip()
        }
    }

    /// Relative deviation `|a - b| / max(|a|, |b|)`; zero when equal.
    fn rel_deviation(&self, other: &Self) -> f64 {
        if self == other {
            return 0.0;
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        let scale = a.abs().max(b.abs());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    }
}

impl Magnitude for Rational {
    fn one() -> Self {
        One::one()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

impl Magnitude for f64 {
    fn one() -> Self {
        1.0
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn to_json(&self) -> Value {
        serde_json::json!(self)
    }
}

/// Field element usable by the dense linear algebra in [`crate::linalg`].
pub trait Scalar:
    Clone
    + Debug
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
    type Magnitude: Magnitude;

    /// Exact arithmetic: tolerances are ignored and pivots are the first nonzero entry.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_magnitude(m: &Self::Magnitude) -> Self;
    fn magnitude(&self) -> Self::Magnitude;
    fn abs_f64(&self) -> f64;
    fn to_complex(&self) -> Complex64;

    /// Zero test against an absolute threshold (ignored for exact scalars).
    fn is_negligible(&self, threshold: f64) -> bool;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, String>;

    fn is_exact_zero(&self) -> bool {
        *self == Self::zero()
    }
}

impl Scalar for Rational {
    type Magnitude = Rational;
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_magnitude(m: &Rational) -> Self {
        m.clone()
    }
    fn magnitude(&self) -> Rational {
        self.abs()
    }
    fn abs_f64(&self) -> f64 {
        ratio_to_f64(self).abs()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(self), 0.0)
    }
    fn is_negligible(&self, _threshold: f64) -> bool {
        Zero::is_zero(self)
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => n
                .as_i64()
                .map(Self::from_i64)
                .ok_or_else(|| format!("non-integer number {n} for an exact rational entry")),
            other => Err(format!("expected \"p/q\" string, got {other}")),
        }
    }
}

impl Scalar for Complex64 {
    type Magnitude = f64;
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_magnitude(m: &f64) -> Self {
        Complex64::new(*m, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn is_negligible(&self, threshold: f64) -> bool {
        self.norm() <= threshold
    }
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let re = parts[0].as_f64().ok_or("real part is not a number")?;
                let im = parts[1].as_f64().ok_or("imaginary part is not a number")?;
                Ok(Complex64::new(re, im))
            }
            Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(0.0), 0.0)),
            other => Err(format!("expected [re, im], got {other}")),
        }
    }
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large numerators/denominators: scale down by bit shifts first.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

/// Shorthand for building an exact rational `n/d`.
pub fn q(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

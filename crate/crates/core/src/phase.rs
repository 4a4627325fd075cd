//! Rational eigenphases. A phase `theta` in `[0, 1)` stands for the
//! eigenvalue `exp(2 pi i theta)`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(Rational64);

impl Phase {
    /// `n/d` reduced into `[0, 1)`.
    pub fn new(n: i64, d: i64) -> Self {
        Self::from_rational(Rational64::new(n, d))
    }

    pub fn from_rational(r: Rational64) -> Self {
        let frac = r - r.floor();
        Phase(frac)
    }

    pub fn zero() -> Self {
        Phase(Rational64::zero())
    }

    pub fn value(&self) -> Rational64 {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_half(&self) -> bool {
        self.0 == Rational64::new(1, 2)
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn shifted(&self) -> Rational64 {
        if self.0 >= Rational64::new(1, 2) {
            self.0 - Rational64::one()
        } else {
            self.0
        }
    }

    /// The eigenvalue `exp(2 pi i theta)`.
    pub fn root_of_unity(&self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.to_f64())
    }

    pub fn to_json(&self) -> Value {
        Value::String(format_r64(&self.0))
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: i64 = n.parse().map_err(|_| format!("bad phase numerator in {s:?}"))?;
        let d: i64 = d.parse().map_err(|_| format!("bad phase denominator in {s:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in phase {s:?}"));
        }
        Ok(Self::new(n, d))
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse(s),
            Value::Number(n) => n
                .as_i64()
                .map(|k| Self::new(k, 1))
                .ok_or_else(|| format!("phase must be \"p/q\", got {n}")),
            other => Err(format!("phase must be \"p/q\", got {other}")),
        }
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Phase {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_r64(&self.0))
    }
}

pub fn format_r64(r: &Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Sum of phases as a rational number (the `tr log` of the representing matrix).
pub fn sum_phases(phases: &[Phase]) -> Rational64 {
    phases.iter().fold(Rational64::zero(), |acc, p| acc + p.0)
}

/// Sum of the shifted representatives in `[-1/2, 1/2)`.
pub fn sum_shifted(phases: &[Phase]) -> Rational64 {
    phases.iter().fold(Rational64::zero(), |acc, p| acc + p.shifted())
}

pub fn abs_r64(r: Rational64) -> Rational64 {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_into_unit_interval() {
        assert_eq!(Phase::new(5, 4), Phase::new(1, 4));
        assert_eq!(Phase::new(-1, 4), Phase::new(3, 4));
        assert_eq!(Phase::new(2, 2), Phase::zero());
    }

    #[test]
    fn shifted_representative() {
        assert_eq!(Phase::new(1, 2).shifted(), Rational64::new(-1, 2));
        assert_eq!(Phase::new(3, 4).shifted(), Rational64::new(-1, 4));
        assert_eq!(Phase::new(1, 3).shifted(), Rational64::new(1, 3));
    }

    #[test]
    fn json_form() {
        let p = Phase::new(2, 6);
        assert_eq!(p.to_json(), Value::String("1/3".into()));
        assert_eq!(Phase::from_json(&p.to_json()).unwrap(), p);
        assert!(Phase::parse("1/0").is_err());
    }
}

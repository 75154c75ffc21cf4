//! Probability values as they appear in channel files.
//!
//! A value is either an exact fraction (`"3/4"`, `"1"`, `"0"`) or a decimal
//! (`0.25`, `"0.25"`). Fractions stay exact so that constructions can be
//! compared entry by entry before they are converted to `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Decimal(f64),
}

impl Probability {
    pub fn zero() -> Self {
        Probability::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability::Exact(BigRational::one())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Probability::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Exact(r) => rational_to_f64(r),
            Probability::Decimal(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Probability::Exact(r) => Some(r),
            Probability::Decimal(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Probability::Exact(r) => r.is_zero(),
            Probability::Decimal(v) => *v == 0.0,
        }
    }
}

impl From<BigRational> for Probability {
    fn from(r: BigRational) -> Self {
        Probability::Exact(r)
    }
}

/// Nearest `f64` to a rational, robust to numerators and denominators beyond `f64` range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    // Scale into a window where both parts are exactly representable.
    let bits = r.denom().bits().max(r.numer().abs().bits()) as i64;
    let shift = (bits - 60).max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 {
        return 0.0;
    }
    n / d
}

/// Parses `"p/q"` or an integer string into an exact rational.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let den = BigInt::from_str(den).map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Parses a fraction `"p/q"` or a plain decimal such as `"0.125"` into an exact rational.
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let Some((int, frac)) = t.split_once('.') else {
        return parse_fraction(t);
    };
    let digits = format!("{int}{frac}");
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("not an exact number: {s:?}")));
    }
    let num = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("not an exact number: {s:?}")))?;
    Ok(BigRational::new(num, num_traits::pow(BigInt::from(10), frac.len())))
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') || (!t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())) {
            return parse_fraction(t).map(Probability::Exact);
        }
        t.parse::<f64>()
            .map(Probability::Decimal)
            .map_err(|_| Error::Parse(format!("not a probability: {s:?}")))
    }
}

/// Rounds to 12 significant digits and prints the shortest decimal that round-trips.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Probability::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Probability::Decimal(v) => f.write_str(&format_decimal(*v)),
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Probability::Exact(_) => serializer.serialize_str(&self.to_string()),
            Probability::Decimal(v) => {
                let rounded: f64 = format_decimal(*v).parse().unwrap_or(*v);
                serializer.serialize_f64(rounded)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ProbVisitor;

        impl Visitor<'_> for ProbVisitor {
            type Value = Probability;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a probability as a number or a \"p/q\" string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Probability, E> {
                Ok(Probability::Decimal(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Probability, E> {
                Ok(Probability::Exact(BigRational::from_integer(v.into())))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Probability, E> {
                Ok(Probability::Exact(BigRational::from_integer(v.into())))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Probability, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ProbVisitor)
    }
}

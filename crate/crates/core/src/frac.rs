//! Exact rational parameters (epsilon, beta, scales).

use crate::error::{Error, Result};
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A small exact fraction, serialized as `"p/q"`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frac(pub Ratio<i64>);

impl Frac {
    pub fn new(num: i64, den: i64) -> Self {
        Frac(Ratio::new(num, den))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.numer() > 0
    }

    /// `ceil(self * n)`; assumes a non-negative fraction.
    pub fn ceil_mul(&self, n: usize) -> usize {
        let p = self.numer() as i128 * n as i128;
        Integer::div_ceil(&p, &(self.denom() as i128)) as usize
    }

    /// `floor(self * n)`; assumes a non-negative fraction.
    pub fn floor_mul(&self, n: usize) -> usize {
        Integer::div_floor(&(self.numer() as i128 * n as i128), &(self.denom() as i128)) as usize
    }

    /// Exact test `count <= self * n`.
    pub fn count_le_times(&self, count: usize, n: usize) -> bool {
        (count as i128) * (self.denom() as i128) <= (self.numer() as i128) * (n as i128)
    }

    pub fn mul(self, other: Frac) -> Frac {
        Frac(self.0 * other.0)
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p/q`, integers, and finite decimals such as `0.15` (read exactly
/// as 15/100).
impl FromStr for Frac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse {s:?} as a fraction"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Frac::new(p, q));
        }
        if let Some((int, dec)) = s.split_once('.') {
            if dec.is_empty() || dec.len() > 12 || !dec.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int_abs: i64 = int.trim_start_matches('-').parse().or_else(|_| {
                if int.is_empty() || int == "-" {
                    Ok(0)
                } else {
                    Err(bad())
                }
            })?;
            let den = 10i64.pow(dec.len() as u32);
            let frac: i64 = dec.parse().map_err(|_| bad())?;
            let num = int_abs * den + frac;
            return Ok(Frac::new(if neg { -num } else { num }, den));
        }
        let p: i64 = s.parse().map_err(|_| bad())?;
        Ok(Frac::new(p, 1))
    }
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

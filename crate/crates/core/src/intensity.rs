//! Exact fixed-point intensity with three decimal places.
//!
//! Intensities are stored as signed integer milli-units so that decay and
//! reinforcement arithmetic is bit-reproducible on every platform.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Milli-units per whole intensity step.
pub const SCALE: i64 = 1000;

/// Importance of a memory pixel, in exact milli-units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Intensity(i64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntensityParseError {
    #[error("empty intensity literal")]
    Empty,
    #[error("malformed intensity literal `{0}`")]
    Malformed(String),
    #[error("intensity `{0}` has more than 3 decimal places")]
    TooPrecise(String),
    #[error("intensity `{0}` is out of range")]
    OutOfRange(String),
}

impl Intensity {
    pub const ZERO: Intensity = Intensity(0);
    pub const ONE: Intensity = Intensity(SCALE);
    /// Pixels at or below this value are forgotten.
    pub const FORGET_THRESHOLD: Intensity = Intensity(-SCALE);

    pub const fn from_milli(milli: i64) -> Self {
        Intensity(milli)
    }

    pub const fn from_whole(units: i64) -> Self {
        Intensity(units * SCALE)
    }

    pub const fn milli(self) -> i64 {
        self.0
    }

    pub fn checked_add(self, rhs: Intensity) -> Option<Intensity> {
        self.0.checked_add(rhs.0).map(Intensity)
    }

    pub fn checked_sub(self, rhs: Intensity) -> Option<Intensity> {
        self.0.checked_sub(rhs.0).map(Intensity)
    }

    /// True once decay has driven the value to -1.000 or below.
    pub fn is_forgotten(self) -> bool {
        self <= Self::FORGET_THRESHOLD
    }
}

impl Add for Intensity {
    type Output = Intensity;
    fn add(self, rhs: Intensity) -> Intensity {
        Intensity(self.0 + rhs.0)
    }
}

impl Sub for Intensity {
    type Output = Intensity;
    fn sub(self, rhs: Intensity) -> Intensity {
        Intensity(self.0 - rhs.0)
    }
}

impl Neg for Intensity {
    type Output = Intensity;
    fn neg(self) -> Intensity {
        Intensity(-self.0)
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:03}", abs / SCALE as u64, abs % SCALE as u64)
    }
}

impl FromStr for Intensity {
    type Err = IntensityParseError;

    /// Parses a plain decimal literal such as `5`, `-0.5` or `3.125`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(IntensityParseError::Empty);
        }
        let malformed = || IntensityParseError::Malformed(s.to_string());
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(malformed());
        }
        if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > 3 {
            return Err(IntensityParseError::TooPrecise(s.to_string()));
        }
        let out_of_range = || IntensityParseError::OutOfRange(s.to_string());
        let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| out_of_range())? };
        let mut frac_milli: i64 = 0;
        for (i, b) in frac.bytes().enumerate() {
            frac_milli += i64::from(b - b'0') * 10_i64.pow(2 - i as u32);
        }
        let milli = whole.checked_mul(SCALE).and_then(|w| w.checked_add(frac_milli)).ok_or_else(out_of_range)?;
        Ok(Intensity(if negative { -milli } else { milli }))
    }
}

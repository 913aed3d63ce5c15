//! Exact dyadic points of the unit interval.
//!
//! Every value handled by the library is a fraction `k / 2^p` with
//! `0 <= k <= 2^p`. Points with different precisions compare by value.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported grid precision in bits.
pub const MAX_PRECISION: u32 = 62;

/// A point `numerator / 2^precision` in `[0, 1]`.
#[derive(Clone, Copy, Debug)]
pub struct UnitPoint {
    numerator: u64,
    precision: u32,
}

impl UnitPoint {
    pub fn new(numerator: u64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        if numerator > 1u64 << precision {
            return Err(Error::Domain(format!(
                "{numerator}/2^{precision} lies outside [0,1]"
            )));
        }
        Ok(Self {
            numerator,
            precision,
        })
    }

    pub(crate) fn new_unchecked(numerator: u64, precision: u32) -> Self {
        debug_assert!(precision <= MAX_PRECISION && numerator <= 1u64 << precision);
        Self {
            numerator,
            precision,
        }
    }

    pub fn zero(precision: u32) -> Result<Self> {
        Self::new(0, precision)
    }

    pub fn one(precision: u32) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self::new_unchecked(1u64 << precision, precision))
    }

    /// Nearest grid point to `value` at the given precision (ties round up).
    pub fn from_f64(value: f64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("{value} lies outside [0,1]")));
        }
        let scaled = (value * (1u64 << precision) as f64 + 0.5).floor() as u64;
        Ok(Self::new_unchecked(
            scaled.min(1u64 << precision),
            precision,
        ))
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Decimal approximation (exact for precisions up to 53 bits).
    pub fn value(&self) -> f64 {
        self.numerator as f64 / (1u64 << self.precision) as f64
    }

    /// Numerator on the finest grid, used for cross-precision comparison.
    fn canonical(&self) -> u128 {
        (self.numerator as u128) << (MAX_PRECISION - self.precision)
    }

    /// Re-expresses the point at precision `p` when that is exact.
    pub fn to_precision(&self, p: u32) -> Option<Self> {
        if p > MAX_PRECISION {
            return None;
        }
        if p >= self.precision {
            Some(Self::new_unchecked(
                self.numerator << (p - self.precision),
                p,
            ))
        } else {
            let shift = self.precision - p;
            if self.numerator & ((1u64 << shift) - 1) == 0 {
                Some(Self::new_unchecked(self.numerator >> shift, p))
            } else {
                None
            }
        }
    }

    /// Shortest exact representation (precision at least 1).
    pub fn reduced(&self) -> Self {
        if self.numerator == 0 {
            return Self::new_unchecked(0, 1);
        }
        let tz = self.numerator.trailing_zeros().min(self.precision - 1);
        Self::new_unchecked(self.numerator >> tz, self.precision - tz)
    }
}

pub(crate) fn check_precision(p: u32) -> Result<()> {
    if p == 0 || p > MAX_PRECISION {
        return Err(Error::Config(format!(
            "precision must lie in 1..={MAX_PRECISION}, got {p}"
        )));
    }
    Ok(())
}

impl PartialEq for UnitPoint {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for UnitPoint {}

impl Hash for UnitPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state)
    }
}

impl PartialOrd for UnitPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UnitPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical().cmp(&other.canonical())
    }
}

impl fmt::Display for UnitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.precision)
    }
}

impl FromStr for UnitPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected \"k/2^p\", got {s:?}"));
        let (num, den) = s.trim().split_once('/').ok_or_else(bad)?;
        let p = den.strip_prefix("2^").ok_or_else(bad)?;
        let numerator = num.trim().parse::<u64>().map_err(|_| bad())?;
        let precision = p.trim().parse::<u32>().map_err(|_| bad())?;
        Self::new(numerator, precision)
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    exact: String,
    decimal: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointInput {
    Object { exact: String },
    Exact(String),
}

impl Serialize for UnitPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            exact: self.to_string(),
            decimal: self.value(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let exact = match PointInput::deserialize(deserializer)? {
            PointInput::Object { exact } | PointInput::Exact(exact) => exact,
        };
        exact.parse().map_err(serde::de::Error::custom)
    }
}

/// `floor(num / den * 2^bits)` for `num < den < 2^127`, `bits <= 128`.
pub(crate) fn binary_fraction(mut num: u128, den: u128, bits: u32) -> u128 {
    debug_assert!(num < den && den < 1u128 << 127 && bits <= 128);
    let mut out = 0u128;
    for _ in 0..bits {
        num <<= 1;
        out <<= 1;
        if num >= den {
            num -= den;
            out |= 1;
        }
    }
    out
}

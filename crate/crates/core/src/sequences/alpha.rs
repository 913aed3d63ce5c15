//! Rotation numbers for Kronecker sequences, held as 128-bit binary fractions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::binary_fraction;

/// Fractional parts of the named constants, `floor({α}·2^128)`.
const NAMED: &[(&str, u128)] = &[
    ("sqrt2", 0x6a09e667f3bcc908b2fb1366ea957d3e),
    ("sqrt3", 0xbb67ae8584caa73b25742d7078b83b89),
    ("golden", 0x9e3779b97f4a7c15f39cc0605cedc834),
    ("e", 0xb7e151628aed2a6abf7158809cf4f3c7),
    ("pi", 0x243f6a8885a308d313198a2e03707344),
];

/// A real number `α`, of which only `{α}` matters for `{αn}`.
///
/// Accepts the names `sqrt2`, `sqrt3`, `golden`, `e`, `pi`, or a decimal
/// literal such as `0.5` or `-1.25`. Decimal literals are converted to a
/// binary fraction by exact long division.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alpha {
    label: String,
    frac: u128,
}

impl Alpha {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// `floor({α}·2^128)`.
    pub fn fraction_bits(&self) -> u128 {
        self.frac
    }

    pub fn approx(&self) -> f64 {
        self.frac as f64 / 2f64.powi(128)
    }

    /// `{α·n}` as a 128-bit binary fraction.
    pub(crate) fn orbit(&self, n: u64) -> u128 {
        self.frac.wrapping_mul(n as u128)
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label = s.trim().to_string();
        if let Some(&(_, frac)) = NAMED.iter().find(|(name, _)| *name == label) {
            return Ok(Self { label, frac });
        }
        let frac = parse_decimal_fraction(&label)?;
        Ok(Self { label, frac })
    }
}

impl TryFrom<String> for Alpha {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Alpha> for String {
    fn from(a: Alpha) -> String {
        a.label
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Fractional part of a decimal literal as `floor({x}·2^128)`.
fn parse_decimal_fraction(s: &str) -> Result<u128> {
    let bad = || {
        Error::Parse(format!(
            "alpha must be a named constant (sqrt2, sqrt3, golden, e, pi) or a decimal literal, got {s:?}"
        ))
    };
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = frac_part.trim_end_matches('0');
    // 10^38 < 2^127 keeps the long division in range
    if digits.len() > 38 {
        return Err(Error::Parse(format!(
            "alpha {s:?} has more than 38 fractional digits"
        )));
    }
    let frac = if digits.is_empty() {
        0
    } else {
        let num: u128 = digits.parse().map_err(|_| bad())?;
        let den = 10u128.pow(digits.len() as u32);
        binary_fraction(num, den, 128)
    };
    Ok(if negative { frac.wrapping_neg() } else { frac })
}

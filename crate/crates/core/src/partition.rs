//! Residue-class partition of the dyadic grid.
//!
//! For a configuration `(m, p)` the interior grid points `k / 2^p`,
//! `0 < k < 2^p`, are split into `m` classes `C_t = { k : k ≡ t (mod m) }`.
//! The classes are pairwise disjoint, cover the grid, and each class meets
//! every open interval wider than `m / 2^p`. The endpoints `0` and `1` get a
//! tag by the same rule but are never produced by [`pick_in_interval`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{check_precision, UnitPoint};

/// Partition parameters: `m` tag classes on the `2^-p` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct PartitionConfig {
    m: u64,
    p: u32,
}

#[derive(Deserialize)]
struct RawPartition {
    m: u64,
    p: u32,
}

impl TryFrom<RawPartition> for PartitionConfig {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        Self::new(raw.m, raw.p)
    }
}

impl PartitionConfig {
    pub fn new(m: u64, p: u32) -> Result<Self> {
        check_precision(p)?;
        if m < 2 {
            return Err(Error::Config(format!("need at least 2 tags, got m={m}")));
        }
        if m >= 1u64 << p {
            return Err(Error::Config(format!("m={m} must be below 2^{p}")));
        }
        Ok(Self { m, p })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn tag(&self, t: u64) -> Result<TagIndex> {
        TagIndex::new(t, self)
    }

    pub fn tags(&self) -> impl Iterator<Item = TagIndex> {
        (0..self.m).map(TagIndex)
    }

    /// Number of grid steps `2^p`.
    pub fn grid_size(&self) -> u64 {
        1u64 << self.p
    }

    fn check_point(&self, x: &UnitPoint) -> Result<()> {
        if x.precision() != self.p {
            return Err(Error::PrecisionMismatch {
                expected: self.p,
                found: x.precision(),
            });
        }
        Ok(())
    }

    fn check_tag(&self, t: TagIndex) -> Result<()> {
        if t.0 >= self.m {
            return Err(Error::Config(format!(
                "tag {} out of range for m={}",
                t.0, self.m
            )));
        }
        Ok(())
    }

    /// Largest `k` in `[lo, hi]` with `k ≡ t (mod m)`, restricted to the
    /// interior `0 < k < 2^p`.
    pub(crate) fn largest_in_range(&self, lo: i128, hi: i128, t: TagIndex) -> Option<u64> {
        let lo = lo.max(1);
        let hi = hi.min(self.grid_size() as i128 - 1);
        if hi < lo {
            return None;
        }
        let m = self.m as i128;
        let k = hi - (hi - t.0 as i128).rem_euclid(m);
        (k >= lo).then_some(k as u64)
    }
}

impl fmt::Display for PartitionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}, p={}", self.m, self.p)
    }
}

/// Index of a tag class, `0 <= t < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagIndex(u64);

impl TagIndex {
    pub fn new(t: u64, cfg: &PartitionConfig) -> Result<Self> {
        let tag = Self(t);
        cfg.check_tag(tag)?;
        Ok(tag)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TagIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Tag of `x = k / 2^p`, i.e. `k mod m`.
pub fn tag_of(x: &UnitPoint, cfg: &PartitionConfig) -> Result<TagIndex> {
    cfg.check_point(x)?;
    Ok(TagIndex(x.numerator() % cfg.m))
}

/// Decides `x ∈ C_t`.
pub fn is_member(x: &UnitPoint, t: TagIndex, cfg: &PartitionConfig) -> Result<bool> {
    cfg.check_tag(t)?;
    Ok(tag_of(x, cfg)? == t)
}

/// Membership test that accepts points on any coarser grid.
pub(crate) fn member_rescaled(x: &UnitPoint, t: TagIndex, cfg: &PartitionConfig) -> Result<bool> {
    let x = x.to_precision(cfg.p).ok_or(Error::PrecisionMismatch {
        expected: cfg.p,
        found: x.precision(),
    })?;
    Ok(x.numerator() % cfg.m == t.0)
}

/// Returns the grid point `k / 2^p` with the largest `k` such that
/// `a·2^p < k < b·2^p` and `k ≡ t (mod m)`.
///
/// `a` and `b` may be given at any precision.
pub fn pick_in_interval(
    a: &UnitPoint,
    b: &UnitPoint,
    t: TagIndex,
    cfg: &PartitionConfig,
) -> Result<UnitPoint> {
    cfg.check_tag(t)?;
    if a >= b {
        return Err(Error::Domain(format!("empty interval ({a}, {b})")));
    }
    let lo = strictly_above(a, cfg.p);
    let hi = strictly_below(b, cfg.p);
    cfg.largest_in_range(lo, hi, t)
        .map(|k| UnitPoint::new_unchecked(k, cfg.p))
        .ok_or(Error::ResolutionExhausted { index: None })
}

/// Smallest grid index at precision `p` strictly above `x`.
fn strictly_above(x: &UnitPoint, p: u32) -> i128 {
    let k = x.numerator() as i128;
    if x.precision() <= p {
        (k << (p - x.precision())) + 1
    } else {
        (k >> (x.precision() - p)) + 1
    }
}

/// Largest grid index at precision `p` strictly below `x`.
fn strictly_below(x: &UnitPoint, p: u32) -> i128 {
    let k = x.numerator() as i128;
    if x.precision() <= p {
        (k << (p - x.precision())) - 1
    } else {
        let shift = x.precision() - p;
        let ceil = (k + (1 << shift) - 1) >> shift;
        ceil - 1
    }
}

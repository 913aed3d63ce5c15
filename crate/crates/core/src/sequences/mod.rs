//! Sequence generators and the tagged constructions built on top of them.
//!
//! Every sequence remembers the [`SequenceDescriptor`] that produced it, and
//! [`SequenceDescriptor::materialize`] regenerates the identical prefix.
//! Indices are 1-based throughout: element `n` of a sequence is `points()[n - 1]`.

mod alpha;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use alpha::Alpha;

use crate::error::{Error, Result};
use crate::partition::{PartitionConfig, TagIndex};
use crate::point::{binary_fraction, check_precision, UnitPoint};

/// Name of the pseudo-random generator recorded in descriptors and reports.
pub const RNG_NAME: &str = "chacha8";

/// Anything that exposes a prefix of points.
pub trait PointSource {
    fn points(&self) -> &[UnitPoint];

    /// Per-element tags, when the source carries them.
    fn tags(&self) -> Option<&[TagIndex]> {
        None
    }

    fn len(&self) -> usize {
        self.points().len()
    }

    fn is_empty(&self) -> bool {
        self.points().is_empty()
    }
}

impl PointSource for [UnitPoint] {
    fn points(&self) -> &[UnitPoint] {
        self
    }
}

impl PointSource for Vec<UnitPoint> {
    fn points(&self) -> &[UnitPoint] {
        self
    }
}

/// How a sequence was produced. Serializes as `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Generator {
    Kronecker {
        alpha: Alpha,
    },
    VanDerCorput {
        base: u32,
    },
    IidUniform {
        rng: String,
    },
    SampleTagged {
        tag: u64,
        m: u64,
        rng: String,
    },
    Lift {
        source: Box<SequenceDescriptor>,
        tag: u64,
        m: u64,
    },
    Spoiler {
        source: Box<SequenceDescriptor>,
        m: u64,
    },
    /// Points supplied directly; cannot be regenerated.
    Explicit {},
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceDescriptor {
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub len: usize,
    pub p: u32,
}

impl SequenceDescriptor {
    /// Regenerates the sequence this descriptor describes.
    pub fn materialize(&self) -> Result<Materialized> {
        let seed = || {
            self.seed
                .ok_or_else(|| Error::Config("random generator descriptor without seed".into()))
        };
        let check_rng = |rng: &str| {
            if rng == RNG_NAME {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "unknown generator {rng:?}, expected {RNG_NAME}"
                )))
            }
        };
        Ok(match &self.generator {
            Generator::Kronecker { alpha } => {
                Materialized::Plain(kronecker(alpha, self.len, self.p)?)
            }
            Generator::VanDerCorput { base } => {
                Materialized::Plain(van_der_corput(*base, self.len, self.p)?)
            }
            Generator::IidUniform { rng } => {
                check_rng(rng)?;
                Materialized::Plain(iid_uniform(seed()?, self.len, self.p)?)
            }
            Generator::SampleTagged { tag, m, rng } => {
                check_rng(rng)?;
                let cfg = PartitionConfig::new(*m, self.p)?;
                Materialized::Tagged(sample_tagged(seed()?, cfg.tag(*tag)?, self.len, &cfg)?)
            }
            Generator::Lift { source, tag, m } => {
                let cfg = PartitionConfig::new(*m, self.p)?;
                let x = source.materialize()?.into_sequence();
                Materialized::Tagged(lift_to_tag(&x, cfg.tag(*tag)?, &cfg)?)
            }
            Generator::Spoiler { source, m } => {
                let cfg = PartitionConfig::new(*m, self.p)?;
                let x = source.materialize()?.into_sequence();
                Materialized::Tagged(diagonal_spoiler(&x, &cfg)?)
            }
            Generator::Explicit {} => {
                return Err(Error::Input(
                    "explicit sequences cannot be regenerated".into(),
                ))
            }
        })
    }
}

/// A materialized prefix `x_1, ..., x_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    descriptor: SequenceDescriptor,
    points: Vec<UnitPoint>,
}

impl Sequence {
    /// Wraps caller-supplied points (descriptor kind `explicit`).
    pub fn from_points(points: Vec<UnitPoint>) -> Self {
        let p = points.iter().map(UnitPoint::precision).max().unwrap_or(1);
        Self {
            descriptor: SequenceDescriptor {
                generator: Generator::Explicit {},
                seed: None,
                len: points.len(),
                p,
            },
            points,
        }
    }

    /// Pairs points with the descriptor that is claimed to produce them.
    pub fn with_descriptor(descriptor: SequenceDescriptor, points: Vec<UnitPoint>) -> Result<Self> {
        if descriptor.len != points.len() {
            return Err(Error::Input(format!(
                "descriptor declares N={} but {} points were supplied",
                descriptor.len,
                points.len()
            )));
        }
        Ok(Self { descriptor, points })
    }

    pub fn descriptor(&self) -> &SequenceDescriptor {
        &self.descriptor
    }

    pub fn into_points(self) -> Vec<UnitPoint> {
        self.points
    }
}

impl PointSource for Sequence {
    fn points(&self) -> &[UnitPoint] {
        &self.points
    }
}

/// Which construction produced a tagged sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Lift,
    Spoiler,
    Sampled,
}

/// A sequence whose every element `y_n` lies in the class `C_{tags[n]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedSequence {
    sequence: Sequence,
    tags: Vec<TagIndex>,
    partition: PartitionConfig,
    provenance: Provenance,
}

impl TaggedSequence {
    /// Rebuilds a tagged sequence from stored parts, re-checking membership.
    pub fn from_parts(
        sequence: Sequence,
        tags: Vec<TagIndex>,
        partition: PartitionConfig,
        provenance: Provenance,
    ) -> Result<Self> {
        if tags.len() != sequence.len() {
            return Err(Error::Input("tag count differs from point count".into()));
        }
        for (i, (x, t)) in sequence.points().iter().zip(&tags).enumerate() {
            if !crate::partition::is_member(x, *t, &partition)? {
                return Err(Error::Input(format!(
                    "element {} ({x}) is not in class {t}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            sequence,
            tags,
            partition,
            provenance,
        })
    }

    pub fn sequence(&self) -> &Sequence {
        &self.sequence
    }

    pub fn descriptor(&self) -> &SequenceDescriptor {
        self.sequence.descriptor()
    }

    pub fn tag_list(&self) -> &[TagIndex] {
        &self.tags
    }

    pub fn partition(&self) -> &PartitionConfig {
        &self.partition
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

impl PointSource for TaggedSequence {
    fn points(&self) -> &[UnitPoint] {
        self.sequence.points()
    }

    fn tags(&self) -> Option<&[TagIndex]> {
        Some(&self.tags)
    }
}

/// Result of regenerating a descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Materialized {
    Plain(Sequence),
    Tagged(TaggedSequence),
}

impl Materialized {
    pub fn sequence(&self) -> &Sequence {
        match self {
            Materialized::Plain(s) => s,
            Materialized::Tagged(t) => t.sequence(),
        }
    }

    pub fn into_sequence(self) -> Sequence {
        match self {
            Materialized::Plain(s) => s,
            Materialized::Tagged(t) => t.sequence,
        }
    }

    pub fn as_tagged(&self) -> Option<&TaggedSequence> {
        match self {
            Materialized::Tagged(t) => Some(t),
            Materialized::Plain(_) => None,
        }
    }
}

impl PointSource for Materialized {
    fn points(&self) -> &[UnitPoint] {
        self.sequence().points()
    }

    fn tags(&self) -> Option<&[TagIndex]> {
        self.as_tagged().map(TaggedSequence::tag_list)
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("sequence length N must be at least 1".into()));
    }
    Ok(())
}

/// Rounds a 128-bit binary fraction to the nearest point of the `2^-p` grid.
fn round_fraction(frac: u128, p: u32) -> UnitPoint {
    let shift = 128 - p;
    let k = (frac >> shift) + ((frac >> (shift - 1)) & 1);
    UnitPoint::new_unchecked(k as u64, p)
}

/// `x_n = {α n}` rounded to the grid, for `n = 1..=N`.
///
/// `{α}` is carried to 128 bits, so the orbit error stays below `N·2^-128`.
pub fn kronecker(alpha: &Alpha, n: usize, p: u32) -> Result<Sequence> {
    check_len(n)?;
    check_precision(p)?;
    let points = (1..=n as u64)
        .into_par_iter()
        .map(|i| round_fraction(alpha.orbit(i), p))
        .collect();
    Ok(Sequence {
        descriptor: SequenceDescriptor {
            generator: Generator::Kronecker {
                alpha: alpha.clone(),
            },
            seed: None,
            len: n,
            p,
        },
        points,
    })
}

/// Radical inverse of `n` in `base`, rounded to the `2^-p` grid.
pub fn radical_inverse(n: u64, base: u32, p: u32) -> UnitPoint {
    let b = base as u128;
    let (mut num, mut den, mut rest) = (0u128, 1u128, n as u128);
    while rest > 0 {
        num = num * b + rest % b;
        den *= b;
        rest /= b;
    }
    if num == 0 {
        return UnitPoint::new_unchecked(0, p);
    }
    let k = (binary_fraction(num, den, p + 1) + 1) >> 1;
    UnitPoint::new_unchecked(k as u64, p)
}

/// Van der Corput sequence: `x_n` is the radical inverse of `n` in `base`.
pub fn van_der_corput(base: u32, n: usize, p: u32) -> Result<Sequence> {
    check_len(n)?;
    check_precision(p)?;
    if base < 2 {
        return Err(Error::Config(format!(
            "base must be at least 2, got {base}"
        )));
    }
    let points = (1..=n as u64)
        .into_par_iter()
        .map(|i| radical_inverse(i, base, p))
        .collect();
    Ok(Sequence {
        descriptor: SequenceDescriptor {
            generator: Generator::VanDerCorput { base },
            seed: None,
            len: n,
            p,
        },
        points,
    })
}

/// `N` i.i.d. draws uniform over the grid points `k / 2^p`, `0 <= k <= 2^p`.
///
/// The stream is ChaCha8 seeded with `seed_from_u64(seed)`; one bounded draw per element.
pub fn iid_uniform(seed: u64, n: usize, p: u32) -> Result<Sequence> {
    check_len(n)?;
    check_precision(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 1u64 << p;
    let points = (0..n)
        .map(|_| UnitPoint::new_unchecked(rng.random_range(0..=top), p))
        .collect();
    Ok(Sequence {
        descriptor: SequenceDescriptor {
            generator: Generator::IidUniform {
                rng: RNG_NAME.into(),
            },
            seed: Some(seed),
            len: n,
            p,
        },
        points,
    })
}

/// `N` i.i.d. draws uniform over the interior points of `C_t`.
///
/// Draws `j` uniformly so that `k = j·m + t` ranges over `0 < k < 2^p`.
pub fn sample_tagged(
    seed: u64,
    t: TagIndex,
    n: usize,
    cfg: &PartitionConfig,
) -> Result<TaggedSequence> {
    check_len(n)?;
    let t = cfg.tag(t.get())?;
    let (m, tv) = (cfg.m(), t.get());
    let j_min = u64::from(tv == 0);
    let j_max = (cfg.grid_size() - 1 - tv) / m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| UnitPoint::new_unchecked(rng.random_range(j_min..=j_max) * m + tv, cfg.p()))
        .collect();
    Ok(TaggedSequence {
        sequence: Sequence {
            descriptor: SequenceDescriptor {
                generator: Generator::SampleTagged {
                    tag: tv,
                    m,
                    rng: RNG_NAME.into(),
                },
                seed: Some(seed),
                len: n,
                p: cfg.p(),
            },
            points,
        },
        tags: vec![t; n],
        partition: *cfg,
        provenance: Provenance::Sampled,
    })
}

/// Replaces `x_n` by the largest point of `C_t` in the open window
/// `(max(0, x_n - 1/n), x_n)`. Used by both the lift and the spoiler.
fn place_below(x: &UnitPoint, n: usize, t: TagIndex, cfg: &PartitionConfig) -> Result<UnitPoint> {
    let x = x
        .to_precision(cfg.p())
        .filter(|_| x.precision() <= cfg.p())
        .ok_or(Error::PrecisionMismatch {
            expected: cfg.p(),
            found: x.precision(),
        })?;
    let grid = cfg.grid_size() as i128;
    let n = n as i128;
    let xk = x.numerator() as i128;
    // k > xk - 2^p/n  <=>  k >= xk - ceil(2^p/n) + 1
    let lo = xk - (grid + n - 1) / n + 1;
    cfg.largest_in_range(lo, xk - 1, t)
        .map(|k| UnitPoint::new_unchecked(k, cfg.p()))
        .ok_or(Error::ResolutionExhausted {
            index: Some(n as usize),
        })
}

fn descriptor_for(generator: Generator, x: &Sequence, cfg: &PartitionConfig) -> SequenceDescriptor {
    SequenceDescriptor {
        generator,
        seed: None,
        len: x.len(),
        p: cfg.p(),
    }
}

/// Moves every term onto `C_t`, staying strictly below and within `1/n` of `x_n`.
pub fn lift_to_tag(x: &Sequence, t: TagIndex, cfg: &PartitionConfig) -> Result<TaggedSequence> {
    let t = cfg.tag(t.get())?;
    let points = x
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, xn)| place_below(xn, i + 1, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let generator = Generator::Lift {
        source: Box::new(x.descriptor().clone()),
        tag: t.get(),
        m: cfg.m(),
    };
    Ok(TaggedSequence {
        sequence: Sequence {
            descriptor: descriptor_for(generator, x, cfg),
            points,
        },
        tags: vec![t; x.len()],
        partition: *cfg,
        provenance: Provenance::Lift,
    })
}

/// Moves term `n` onto `C_{n-1}`, so every class receives at most one term.
///
/// Requires `m >= N`.
pub fn diagonal_spoiler(x: &Sequence, cfg: &PartitionConfig) -> Result<TaggedSequence> {
    if (cfg.m() as u128) < x.len() as u128 {
        return Err(Error::Config(format!(
            "spoiler needs a fresh tag per term: m={} < N={}",
            cfg.m(),
            x.len()
        )));
    }
    let tags: Vec<TagIndex> = (0..x.len() as u64)
        .map(|s| cfg.tag(s))
        .collect::<Result<_>>()?;
    let points = x
        .points()
        .par_iter()
        .zip(tags.par_iter())
        .enumerate()
        .map(|(i, (xn, t))| place_below(xn, i + 1, *t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let generator = Generator::Spoiler {
        source: Box::new(x.descriptor().clone()),
        m: cfg.m(),
    };
    Ok(TaggedSequence {
        sequence: Sequence {
            descriptor: descriptor_for(generator, x, cfg),
            points,
        },
        tags,
        partition: *cfg,
        provenance: Provenance::Spoiler,
    })
}

/// The set of tags actually hit by `y`; every other class has count zero.
pub fn witness_tags(y: &TaggedSequence) -> BTreeSet<TagIndex> {
    y.tags.iter().copied().collect()
}

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{member_rescaled, PartitionConfig, TagIndex};
use crate::point::UnitPoint;
use crate::ud_tests::IntervalQuery;

pub const MAX_POLY_DEGREE: usize = 6;
pub const MAX_TRIG_FREQUENCY: u32 = 8;

/// Padding added to Lipschitz brackets so that float evaluation error cannot cross them.
const BRACKET_PAD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigFn {
    Sin,
    Cos,
}

/// One summand `value · 1_I(x)` of a step function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPiece {
    pub interval: IntervalQuery,
    pub value: f64,
}

/// The built-in integrand family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntegrandSpec {
    /// `Σ coeffs[i] x^i`, degree at most 6.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude · sin(2π·freq·x)` or the cosine, `1 <= freq <= 8`.
    Trig {
        func: TrigFn,
        freq: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `Σ value · 1_I(x)` over the pieces.
    Step { pieces: Vec<StepPiece> },
    /// A step function multiplied by the indicator of `C_tag`.
    TaggedStep {
        pieces: Vec<StepPiece>,
        tag: TagIndex,
        partition: PartitionConfig,
    },
}

fn one() -> f64 {
    1.0
}

impl IntegrandSpec {
    pub fn constant(c: f64) -> Self {
        Self::Polynomial { coeffs: vec![c] }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self::Polynomial { coeffs }
    }

    pub fn sin(freq: u32) -> Self {
        Self::Trig {
            func: TrigFn::Sin,
            freq,
            amplitude: 1.0,
        }
    }

    pub fn cos(freq: u32) -> Self {
        Self::Trig {
            func: TrigFn::Cos,
            freq,
            amplitude: 1.0,
        }
    }

    pub fn indicator(interval: IntervalQuery) -> Self {
        Self::Step {
            pieces: vec![StepPiece {
                interval,
                value: 1.0,
            }],
        }
    }

    /// Step function over consecutive cells `[a_i, a_{i+1})`, the last cell closed.
    /// `breakpoints` runs from 0 to 1 and has one more entry than `values`.
    pub fn step(breakpoints: &[UnitPoint], values: &[f64]) -> Result<Self> {
        Ok(Self::Step {
            pieces: cells(breakpoints, values)?,
        })
    }

    /// Restricts a step function to `C_t`.
    pub fn tagged(self, tag: TagIndex, partition: PartitionConfig) -> Result<Self> {
        let tag = partition.tag(tag.get())?;
        match self {
            Self::Step { pieces } | Self::TaggedStep { pieces, .. } => Ok(Self::TaggedStep {
                pieces,
                tag,
                partition,
            }),
            other => Err(Error::UnsupportedIntegrand(format!(
                "only step functions carry a tag, got {}",
                other.label()
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Polynomial { coeffs } => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*x"),
                        _ => format!("{c}*x^{i}"),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join(" + ")
                }
            }
            Self::Trig {
                func,
                freq,
                amplitude,
            } => {
                let name = match func {
                    TrigFn::Sin => "sin",
                    TrigFn::Cos => "cos",
                };
                format!("{amplitude}*{name}(2pi*{freq}*x)")
            }
            Self::Step { pieces } => format!("step[{}]", pieces_label(pieces)),
            Self::TaggedStep { pieces, tag, .. } => {
                format!("step[{}]*chi_C{tag}", pieces_label(pieces))
            }
        }
    }

    /// Checks the parameters against the built-in family.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::UnsupportedIntegrand(format!(
                    "non-finite parameter {v}"
                )))
            }
        };
        match self {
            Self::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.len() > MAX_POLY_DEGREE + 1 {
                    return Err(Error::UnsupportedIntegrand(format!(
                        "polynomial needs 1..={} coefficients, got {}",
                        MAX_POLY_DEGREE + 1,
                        coeffs.len()
                    )));
                }
                coeffs.iter().try_for_each(|c| finite(*c))
            }
            Self::Trig {
                freq, amplitude, ..
            } => {
                if !(1..=MAX_TRIG_FREQUENCY).contains(freq) {
                    return Err(Error::UnsupportedIntegrand(format!(
                        "trig frequency must lie in 1..={MAX_TRIG_FREQUENCY}, got {freq}"
                    )));
                }
                finite(*amplitude)
            }
            Self::Step { pieces } => pieces.iter().try_for_each(|p| finite(p.value)),
            Self::TaggedStep {
                pieces,
                tag,
                partition,
            } => {
                partition.tag(tag.get())?;
                pieces.iter().try_for_each(|p| finite(p.value))
            }
        }
    }

    /// Value at `x`.
    pub fn eval(&self, x: &UnitPoint) -> Result<f64> {
        Ok(match self {
            Self::Polynomial { coeffs } => {
                let v = x.value();
                coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
            }
            Self::Trig {
                func,
                freq,
                amplitude,
            } => {
                let arg = TAU * *freq as f64 * x.value();
                amplitude
                    * match func {
                        TrigFn::Sin => arg.sin(),
                        TrigFn::Cos => arg.cos(),
                    }
            }
            Self::Step { pieces } => step_value(pieces, x),
            Self::TaggedStep {
                pieces,
                tag,
                partition,
            } => {
                if member_rescaled(x, *tag, partition)? {
                    step_value(pieces, x)
                } else {
                    0.0
                }
            }
        })
    }

    /// `∫_0^1 f dλ` in closed form. For a tagged step this is also `∫ f dλ_t`,
    /// since `λ_t` lives on `C_t` and agrees with length on intervals.
    pub fn closed_form(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / (i + 1) as f64)
                .sum(),
            // whole periods
            Self::Trig { .. } => 0.0,
            Self::Step { pieces } | Self::TaggedStep { pieces, .. } => {
                pieces.iter().map(|p| p.value * p.interval.length()).sum()
            }
        })
    }

    /// Bound on `|f'|` over `[0,1]` for the continuous kinds.
    fn lipschitz(&self) -> Option<f64> {
        match self {
            Self::Polynomial { coeffs } => Some(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| i as f64 * c.abs())
                    .sum(),
            ),
            Self::Trig {
                freq, amplitude, ..
            } => Some(TAU * *freq as f64 * amplitude.abs()),
            _ => None,
        }
    }

    /// Step functions `f_1 <= self <= f_2` on `2^bits` equal cells, with
    /// `∫ (f_2 - f_1) <= L / 2^bits + 2·pad` for a Lipschitz bound `L`.
    pub fn step_brackets(&self, bits: u32) -> Result<(Self, Self)> {
        self.validate()?;
        let lipschitz = self.lipschitz().ok_or_else(|| {
            Error::UnsupportedIntegrand(format!("no step brackets for {}", self.label()))
        })?;
        if !(1..=24).contains(&bits) {
            return Err(Error::Config(format!(
                "bracket resolution must lie in 1..=24 bits, got {bits}"
            )));
        }
        let cells = 1u64 << bits;
        let breakpoints: Vec<UnitPoint> = (0..=cells)
            .map(|j| UnitPoint::new(j, bits))
            .collect::<Result<_>>()?;
        let half_width = 0.5 / cells as f64;
        let slack = lipschitz * half_width + BRACKET_PAD;
        let centers: Vec<f64> = (0..cells)
            .map(|j| {
                let mid = UnitPoint::new(2 * j + 1, bits + 1)?;
                self.eval(&mid)
            })
            .collect::<Result<_>>()?;
        let lower: Vec<f64> = centers.iter().map(|v| v - slack).collect();
        let upper: Vec<f64> = centers.iter().map(|v| v + slack).collect();
        Ok((
            Self::step(&breakpoints, &lower)?,
            Self::step(&breakpoints, &upper)?,
        ))
    }
}

fn step_value(pieces: &[StepPiece], x: &UnitPoint) -> f64 {
    pieces
        .iter()
        .filter(|p| p.interval.contains(x))
        .map(|p| p.value)
        .sum()
}

fn pieces_label(pieces: &[StepPiece]) -> String {
    pieces
        .iter()
        .map(|p| {
            let close = match p.interval.endpoints() {
                crate::ud_tests::Endpoints::Closed => ']',
                crate::ud_tests::Endpoints::HalfOpen => ')',
            };
            format!("{}@[{},{}{close}", p.value, p.interval.c(), p.interval.d())
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn cells(breakpoints: &[UnitPoint], values: &[f64]) -> Result<Vec<StepPiece>> {
    if breakpoints.len() != values.len() + 1 || values.is_empty() {
        return Err(Error::Input(format!(
            "step function needs one more breakpoint than values, got {} and {}",
            breakpoints.len(),
            values.len()
        )));
    }
    let first = breakpoints[0];
    let last = breakpoints[breakpoints.len() - 1];
    if first.numerator() != 0 || last != UnitPoint::one(last.precision())? {
        return Err(Error::Input("step breakpoints must run from 0 to 1".into()));
    }
    let n = values.len();
    breakpoints
        .windows(2)
        .zip(values)
        .enumerate()
        .map(|(i, (w, &value))| {
            let interval = if i + 1 == n {
                IntervalQuery::closed(w[0], w[1])?
            } else {
                IntervalQuery::half_open(w[0], w[1])?
            };
            Ok(StepPiece { interval, value })
        })
        .collect()
}

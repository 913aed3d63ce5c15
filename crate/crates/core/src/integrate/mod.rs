//! Quasi-Monte-Carlo and tagged integration against the built-in integrand family.

mod experiment;
mod integrand;

use serde::{Deserialize, Serialize};

pub use experiment::{
    hlawka_experiment, run_experiment, slln_experiment, trial_seed, ExperimentConfig,
    ExperimentReport, Probe, TrialRow, DEFAULT_DELTA,
};
pub use integrand::{IntegrandSpec, StepPiece, TrigFn, MAX_POLY_DEGREE, MAX_TRIG_FREQUENCY};

use crate::error::{Error, Result};
use crate::partition::{member_rescaled, PartitionConfig, TagIndex};
use crate::point::UnitPoint;
use crate::sequences::PointSource;

/// Panel count used for quadrature references.
pub const REFERENCE_PANELS: u64 = 1 << 20;

/// Reference value `∫_0^1 f dλ`.
///
/// Every kind in the built-in family has a closed form, which is returned
/// directly; `panels` is only consulted by [`midpoint_rule`] for kinds
/// without one.
pub fn quadrature_reference(f: &IntegrandSpec, panels: u64) -> Result<f64> {
    if panels == 0 {
        return Err(Error::Config("quadrature needs at least one panel".into()));
    }
    f.closed_form()
}

/// Composite midpoint rule, error `O(1/panels²)` for smooth integrands.
pub fn midpoint_rule(f: &IntegrandSpec, panels: u64) -> Result<f64> {
    if panels == 0 {
        return Err(Error::Config("quadrature needs at least one panel".into()));
    }
    f.validate()?;
    let width = 1.0 / panels as f64;
    let mut sum = 0.0;
    for j in 0..panels {
        let mid = UnitPoint::from_f64((j as f64 + 0.5) * width, 52)?;
        sum += f.eval(&mid)?;
    }
    Ok(sum * width)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmcEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    pub estimate: f64,
    pub reference: f64,
    pub deviation: f64,
}

fn check_len(len: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if n > len {
        return Err(Error::Input(format!(
            "N={n} exceeds the materialized length {len}"
        )));
    }
    Ok(())
}

/// `(1/N) Σ_{n<=N} f(x_n)`, summed in index order, with its deviation from the reference.
pub fn qmc_integrate<S: PointSource + ?Sized>(
    f: &IntegrandSpec,
    seq: &S,
    n: usize,
) -> Result<QmcEstimate> {
    let points = seq.points();
    check_len(points.len(), n)?;
    f.validate()?;
    let mut sum = 0.0;
    for x in &points[..n] {
        sum += f.eval(x)?;
    }
    let estimate = sum / n as f64;
    let reference = quadrature_reference(f, REFERENCE_PANELS)?;
    Ok(QmcEstimate {
        n,
        estimate,
        reference,
        deviation: estimate - reference,
    })
}

/// `(1/N) Σ_{n<=N} h(x_n)·[x_n ∈ C_t]` against the reference `∫ h dλ`.
pub fn tagged_integrate<S: PointSource + ?Sized>(
    h: &IntegrandSpec,
    t: TagIndex,
    seq: &S,
    n: usize,
    cfg: &PartitionConfig,
) -> Result<QmcEstimate> {
    let points = seq.points();
    check_len(points.len(), n)?;
    h.validate()?;
    let t = cfg.tag(t.get())?;
    let mut sum = 0.0;
    for x in &points[..n] {
        if member_rescaled(x, t, cfg)? {
            sum += h.eval(x)?;
        }
    }
    let estimate = sum / n as f64;
    let reference = quadrature_reference(h, REFERENCE_PANELS)?;
    Ok(QmcEstimate {
        n,
        estimate,
        reference,
        deviation: estimate - reference,
    })
}

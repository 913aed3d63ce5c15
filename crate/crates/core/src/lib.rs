//! Uniform distribution on `[0,1]` relative to a partition of the unit
//! interval into tag classes.
//!
//! The classes `C_0, ..., C_{m-1}` are the residue classes `k mod m` of the
//! dyadic grid `k / 2^p`. A sequence is *tagged-uniform* for `t` when the
//! share of its first `N` terms landing in `[c,d] ∩ C_t` tends to `d - c`.
//!
//! - [`partition`]: the grid partition and its membership/selection oracles.
//! - [`sequences`]: Kronecker, van der Corput and i.i.d. generators, plus
//!   the lift onto one class and the diagonal spoiler across all classes.
//! - [`ud_tests`]: counting ratios, verdicts, star discrepancy, Weyl-type checks.
//! - [`integrate`]: QMC and tagged integration, strong-law and Hlawka-type experiments.

pub mod error;
pub mod integrate;
pub mod partition;
pub mod point;
pub mod sequences;

pub use error::{Error, Result};
pub use integrate::{
    hlawka_experiment, midpoint_rule, qmc_integrate, quadrature_reference, run_experiment,
    slln_experiment, tagged_integrate, ExperimentConfig, ExperimentReport, IntegrandSpec, Probe,
    QmcEstimate,
};
pub use partition::{is_member, pick_in_interval, tag_of, PartitionConfig, TagIndex};
pub use point::{UnitPoint, MAX_PRECISION};
pub use sequences::{
    diagonal_spoiler, iid_uniform, kronecker, lift_to_tag, sample_tagged, van_der_corput,
    witness_tags, Alpha, Generator, Materialized, PointSource, Provenance, Sequence,
    SequenceDescriptor, TaggedSequence,
};
pub use ud_tests::{
    counting_report, dyadic_grid, interval_count_ratio, star_discrepancy, tagged_count_ratio,
    tagged_weyl_check, ud_verdict, CountRatio, CountingReport, Endpoints, IntervalQuery, UdVerdict,
    WeylReport,
};

//! Exact auditing of a partition of a population for group unfairness.
//!
//! A population is a binary matrix of protected status variables (PSVs) with
//! one class label per instance. A [`Selector`] picks a disjunction of PSVs;
//! the audits search for the shortest selector whose covered group is treated
//! unfairly by the partition, under three tests:
//!
//! * count based ([`audit_count`]): the group is under-represented in one
//!   class and over-represented elsewhere;
//! * utility weighted ([`audit_utility`]): with per-class utilities chosen
//!   from expert-supplied boxes, the group's realized utility falls short of
//!   its uniform-random-allocation expectation;
//! * pairwise ([`audit_pairwise`]): two disjoint groups whose utility-weighted
//!   counts differ by at least a gap.
//!
//! [`enumeration`] repeats a search with exclusion constraints to list
//! several independent findings, and [`oracle`] holds brute-force verifiers
//! used to cross-check every search.

pub mod audit_count;
pub mod audit_pairwise;
pub mod audit_utility;
pub mod bits;
pub mod coverage;
pub mod dataset;
pub mod enumeration;
pub mod error;
pub mod oracle;
pub mod ratio;
mod search;
pub mod synth;

pub use audit_count::{
    audit_count_all, udsc_feasible, udsc_search, Comparison, CountConfig, CountFinding,
    CountThresholds, Direction, ThresholdScale,
};
pub use audit_pairwise::{
    pairwise_margin, pairwise_search, PairObjective, PairwiseConfig, PairwiseFinding,
};
pub use audit_utility::{
    expected_random_utility, utility_margin, utility_search, UtilityBounds, UtilityConfig,
    UtilityFinding, UTILITY_TOLERANCE,
};
pub use bits::BitSet;
pub use coverage::{
    conditional_probability, coverage_counts, covers, population_probability, CoverageCounts,
    Selector,
};
pub use dataset::{Dataset, PsvOrigin, PsvSchema};
pub use enumeration::{
    auto_gamma, enumerate_findings, enumerate_with_findings, AuditConfig, AuditMode, AuditReport,
    DatasetSummary, ReportFinding, StopReason, Verdict,
};
pub use error::{Error, Result};
pub use oracle::Finding;
pub use ratio::Ratio;
pub use search::{ExclusionMode, Exclusions};

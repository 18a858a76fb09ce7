//! Iterated audits: search, record the finding, exclude it, search again.
//!
//! Under [`ExclusionMode::Disjoint`] each finding removes its PSVs from the
//! pool, so at most `m` iterations run and the findings are pairwise
//! disjoint. [`ExclusionMode::NotEqual`] only forbids exact repeats and
//! relies on `limit` to stop.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::audit_count::{audit_count_all, CountConfig};
use crate::audit_pairwise::{pairwise_search, PairwiseConfig};
use crate::audit_utility::{utility_search, UtilityConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::oracle::Finding;
use crate::ratio::{self, Ratio};
use crate::search::{ExclusionMode, Exclusions, SearchSpace};

/// An audit mode with its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditMode {
    Count(CountConfig),
    Utility(UtilityConfig),
    Pairwise(PairwiseConfig),
}

impl AuditMode {
    pub fn name(&self) -> &'static str {
        match self {
            AuditMode::Count(_) => "count",
            AuditMode::Utility(_) => "utility",
            AuditMode::Pairwise(_) => "pairwise",
        }
    }

    /// One search under `exclusions`.
    pub fn search(&self, data: &Dataset, exclusions: &Exclusions) -> Result<Option<Finding>> {
        Ok(match self {
            AuditMode::Count(cfg) => audit_count_all(data, cfg, exclusions).map(Finding::Count),
            AuditMode::Utility(cfg) => utility_search(data, cfg, exclusions)?.map(Finding::Utility),
            AuditMode::Pairwise(cfg) => {
                pairwise_search(data, cfg, exclusions)?.map(Finding::Pairwise)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub mode: AuditMode,
    pub exclusion: ExclusionMode,
    /// Maximum number of findings.
    pub limit: usize,
    /// Gap computed by [`auto_gamma`], when the caller used it.
    #[serde(
        default,
        with = "ratio::serde_ratio::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub auto_gamma: Option<Ratio>,
}

impl AuditConfig {
    pub fn new(mode: AuditMode, limit: usize) -> Self {
        AuditConfig {
            mode,
            exclusion: ExclusionMode::Disjoint,
            limit,
            auto_gamma: None,
        }
    }

    pub fn exclusion(mut self, exclusion: ExclusionMode) -> Self {
        self.exclusion = exclusion;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Fair,
    Unfair,
}

/// Why the enumeration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The last search found nothing.
    Exhausted,
    /// `limit` findings were collected.
    LimitReached,
}

/// One finding in report form. Pairwise findings fill the `over_*` fields
/// and have no target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFinding {
    /// Selected PSV names (`x`, the under-served group, for pairwise).
    pub selector_psvs: Vec<String>,
    /// Selector as a 0/1 vector over the PSVs.
    pub selector: Vec<u8>,
    pub target_class: Option<usize>,
    pub target_class_name: Option<String>,
    pub coverage: Vec<usize>,
    pub utilities: Option<Vec<f64>>,
    /// Utility shortfall, or pairwise gap.
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(
        default,
        with = "ratio::serde_ratio::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub target_fraction: Option<Ratio>,
    #[serde(
        default,
        with = "ratio::serde_ratio::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub other_fraction: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over_psvs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over_selector: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over_coverage: Option<Vec<usize>>,
}

impl ReportFinding {
    pub fn from_finding(data: &Dataset, finding: &Finding) -> Self {
        let names = |s: &crate::coverage::Selector| -> Vec<String> {
            s.names(data).into_iter().map(str::to_string).collect()
        };
        let base = |selector: &crate::coverage::Selector, coverage: &[usize]| ReportFinding {
            selector_psvs: names(selector),
            selector: selector.to_bits(),
            target_class: None,
            target_class_name: None,
            coverage: coverage.to_vec(),
            utilities: None,
            margin: None,
            realized: None,
            expected: None,
            target_fraction: None,
            other_fraction: None,
            over_psvs: None,
            over_selector: None,
            over_coverage: None,
        };
        match finding {
            Finding::Count(f) => ReportFinding {
                target_class: Some(f.target),
                target_class_name: Some(data.class_names()[f.target].clone()),
                target_fraction: Some(f.target_fraction),
                other_fraction: Some(f.other_fraction),
                ..base(&f.selector, &f.coverage.per_class)
            },
            Finding::Utility(f) => ReportFinding {
                target_class: Some(f.target),
                target_class_name: Some(data.class_names()[f.target].clone()),
                utilities: Some(f.utilities.clone()),
                margin: Some(f.margin),
                realized: Some(f.realized),
                expected: Some(f.expected),
                ..base(&f.selector, &f.coverage.per_class)
            },
            Finding::Pairwise(f) => ReportFinding {
                utilities: Some(f.utilities.clone()),
                margin: Some(f.gap),
                over_psvs: Some(names(&f.over)),
                over_selector: Some(f.over.to_bits()),
                over_coverage: Some(f.over_coverage.per_class.clone()),
                ..base(&f.under, &f.under_coverage.per_class)
            },
        }
    }
}

/// Shape of the audited dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub psv_names: Vec<String>,
    pub class_names: Vec<String>,
    pub class_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
}

impl DatasetSummary {
    pub fn of(data: &Dataset) -> Self {
        DatasetSummary {
            n: data.n(),
            m: data.m(),
            k: data.k(),
            psv_names: data.schema().names().to_vec(),
            class_names: data.class_names().to_vec(),
            class_sizes: data.class_sizes().to_vec(),
            id_column: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mode: String,
    pub config: AuditConfig,
    /// `unfair` iff at least one finding was emitted.
    pub verdict: Verdict,
    pub findings: Vec<ReportFinding>,
    /// Findings per target class; pairwise findings are not counted.
    pub histogram: Vec<usize>,
    /// Searches run, including the final empty one when exhausted.
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub dataset: DatasetSummary,
}

/// Run `config.mode` repeatedly, excluding every earlier finding's
/// selectors (both members for pairwise findings), until a search comes
/// back empty or `config.limit` findings are collected.
pub fn enumerate_findings(data: &Dataset, config: &AuditConfig) -> Result<AuditReport> {
    Ok(enumerate_with_findings(data, config)?.0)
}

/// [`enumerate_findings`] also returning the typed findings.
pub fn enumerate_with_findings(
    data: &Dataset,
    config: &AuditConfig,
) -> Result<(AuditReport, Vec<Finding>)> {
    if config.limit == 0 {
        return Err(Error::InvalidParameter("limit must be at least 1".into()));
    }
    let mut exclusions = Exclusions::new(config.exclusion, Vec::new());
    let mut findings = Vec::new();
    let mut iterations = 0;
    let stop_reason = loop {
        if findings.len() >= config.limit {
            break StopReason::LimitReached;
        }
        iterations += 1;
        match config.mode.search(data, &exclusions)? {
            Some(f) => {
                f.selectors()
                    .into_iter()
                    .for_each(|s| exclusions.push(s.clone()));
                findings.push(f);
            }
            None => break StopReason::Exhausted,
        }
    };
    let mut histogram = vec![0; data.k()];
    for t in findings.iter().filter_map(Finding::target) {
        histogram[t] += 1;
    }
    let report = AuditReport {
        mode: config.mode.name().to_string(),
        config: config.clone(),
        verdict: if findings.is_empty() {
            Verdict::Fair
        } else {
            Verdict::Unfair
        },
        findings: findings
            .iter()
            .map(|f| ReportFinding::from_finding(data, f))
            .collect(),
        histogram,
        iterations,
        stop_reason,
        dataset: DatasetSummary::of(data),
    };
    Ok((report, findings))
}

/// Most selectors [`auto_gamma`] will enumerate.
pub const AUTO_GAMMA_MAX_SELECTORS: usize = 1 << 20;

/// `0.8` times the median population probability `P(x)` over all
/// selectors of at most `max_order` PSVs (an even count takes the mean of
/// the two middle values).
pub fn auto_gamma(data: &Dataset, max_order: usize) -> Result<Ratio> {
    if data.m() == 0 {
        return Err(Error::NoPsvs);
    }
    if max_order == 0 {
        return Err(Error::InvalidParameter(
            "max order must be at least 1".into(),
        ));
    }
    let order = max_order.min(data.m());
    let mut total: usize = 0;
    let mut binom: usize = 1;
    for s in 1..=order {
        binom = binom * (data.m() - s + 1) / s;
        total = total.saturating_add(binom);
    }
    if total > AUTO_GAMMA_MAX_SELECTORS {
        return Err(Error::InvalidParameter(format!(
            "{total} selectors of order ≤ {order}; at most {AUTO_GAMMA_MAX_SELECTORS} supported"
        )));
    }
    let space = SearchSpace::new(data, &Exclusions::none(), None, false);
    let mut covered = Vec::with_capacity(total);
    space.preorder::<()>(order, |_, counts| {
        covered.push(counts.iter().sum::<usize>());
        ControlFlow::Continue(())
    });
    covered.sort_unstable();
    let len = covered.len();
    let twice_median = if len % 2 == 1 {
        2 * covered[len / 2]
    } else {
        covered[len / 2 - 1] + covered[len / 2]
    };
    let n = data.n() as i64;
    Ok(Ratio::new(4 * twice_median as i64, 10 * n))
}

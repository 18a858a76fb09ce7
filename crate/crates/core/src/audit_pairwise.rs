//! Pairwise utility unfairness between two disjoint groups.
//!
//! Groups `x` and `w` share no PSV. Under box-feasible utilities `U` the
//! gap `sum_k U_k (c_k(w) - c_k(x))` measures how much more utility `w`
//! collects than `x`; the pair is a witness at gap `gamma` when some `U`
//! pushes it to `gamma` or beyond. As for single-group utility audits the
//! inner maximization is separable and attained at a box corner.
//!
//! Findings are labeled canonically: `over` is the group whose best gap
//! over the other is larger, with ties resolved so that `under` is the
//! lexicographically smaller selector. Each unordered pair is therefore
//! reported in one orientation only.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit_utility::{UtilityBounds, UTILITY_TOLERANCE};
use crate::coverage::{CoverageCounts, Selector};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::search::{Criterion, Exclusions, SearchSpace};

/// Which pair size the search prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairObjective {
    /// Smallest `|x| + |w|`.
    #[default]
    Shortest,
    /// Largest `|x| + |w|` up to the size limit.
    Longest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseConfig {
    pub bounds: UtilityBounds,
    pub gamma: f64,
    /// Largest `|x| + |w|` considered; at least 2.
    pub max_pair_size: usize,
    pub objective: PairObjective,
    pub forbid_same_attribute: bool,
}

impl PairwiseConfig {
    pub fn new(bounds: UtilityBounds, gamma: f64, max_pair_size: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "γ must be positive, got {gamma}"
            )));
        }
        if max_pair_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "max pair size must be at least 2, got {max_pair_size}"
            )));
        }
        Ok(PairwiseConfig {
            bounds,
            gamma,
            max_pair_size,
            objective: PairObjective::Shortest,
            forbid_same_attribute: false,
        })
    }

    pub fn objective(mut self, objective: PairObjective) -> Self {
        self.objective = objective;
        self
    }

    pub fn forbid_same_attribute(mut self, forbid: bool) -> Self {
        self.forbid_same_attribute = forbid;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseFinding {
    /// `x`, the group receiving less utility.
    pub under: Selector,
    /// `w`, the group receiving more utility.
    pub over: Selector,
    pub under_coverage: CoverageCounts,
    pub over_coverage: CoverageCounts,
    pub utilities: Vec<f64>,
    /// `sum_k U_k (c_k(w) - c_k(x))`.
    pub gap: f64,
}

fn best_gap(
    cx: &[usize],
    cw: &[usize],
    bounds: &UtilityBounds,
    witness: Option<&mut Vec<f64>>,
) -> f64 {
    let mut gap = 0.0;
    let mut out = witness;
    if let Some(w) = out.as_deref_mut() {
        w.clear();
    }
    for k in 0..cx.len() {
        let d = cw[k] as f64 - cx[k] as f64;
        let u = if cw[k] > cx[k] {
            bounds.upper()[k]
        } else {
            bounds.lower()[k]
        };
        if let Some(w) = out.as_deref_mut() {
            w.push(u);
        }
        gap += d * u;
    }
    gap
}

/// `(best_gap, witness)`: the maximum over the box of
/// `sum_k U_k (c_k(w) - c_k(x))` and a maximizing `U`.
pub fn pairwise_margin(
    cx: &CoverageCounts,
    cw: &CoverageCounts,
    bounds: &UtilityBounds,
) -> Result<(f64, Vec<f64>)> {
    if cx.k() != cw.k() {
        return Err(Error::LengthMismatch {
            expected: cx.k(),
            found: cw.k(),
        });
    }
    bounds.check_len(cx.k())?;
    let mut witness = Vec::with_capacity(cx.k());
    let gap = best_gap(&cx.per_class, &cw.per_class, bounds, Some(&mut witness));
    Ok((gap, witness))
}

/// Whether the ordered pair `x -> w` is the canonical labeling of the
/// unordered pair, given both best gaps.
pub fn is_canonical(gap_xw: f64, gap_wx: f64, x: &[usize], w: &[usize]) -> bool {
    if (gap_xw - gap_wx).abs() <= UTILITY_TOLERANCE {
        x < w
    } else {
        gap_xw > gap_wx
    }
}

/// Leaf test shared by the search and the oracle: `w` beats `x` by at least
/// `gamma` and `x -> w` is the canonical orientation.
pub fn pair_qualifies(
    cx: &[usize],
    cw: &[usize],
    x: &[usize],
    w: &[usize],
    bounds: &UtilityBounds,
    gamma: f64,
) -> bool {
    let forward = best_gap(cx, cw, bounds, None);
    if forward < gamma - UTILITY_TOLERANCE {
        return false;
    }
    is_canonical(forward, best_gap(cw, cx, bounds, None), x, w)
}

/// Search for `w` against a fixed `x`.
struct PartnerCriterion<'c> {
    cx: &'c [usize],
    x: &'c [usize],
    bounds: &'c UtilityBounds,
    gamma: f64,
}

impl Criterion for PartnerCriterion<'_> {
    fn prune(&self, current: &[usize], optimistic: &[usize]) -> bool {
        // d_k ranges over [current_k - cx_k, optimistic_k - cx_k]
        let mut bound = 0.0;
        let mut magnitude = 0.0;
        for k in 0..self.cx.len() {
            let lo = current[k] as f64 - self.cx[k] as f64;
            let hi = optimistic[k] as f64 - self.cx[k] as f64;
            let (a, b) = (self.bounds.lower()[k], self.bounds.upper()[k]);
            let term = [a * lo, a * hi, b * lo, b * hi]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            magnitude += term.abs();
            bound += term;
        }
        let slack = 1e-9 * (1.0 + magnitude);
        bound < self.gamma - UTILITY_TOLERANCE - slack
    }

    fn accept(&self, counts: &[usize], chosen: &[usize]) -> bool {
        pair_qualifies(self.cx, counts, self.x, chosen, self.bounds, self.gamma)
    }
}

/// `x`, its counts, `w`, its counts.
type PairHit = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>);

/// First canonical pair of total size `s`, ordered by `x` then `w`
/// (lexicographic on index lists).
fn first_pair_of_size(
    data: &Dataset,
    cfg: &PairwiseConfig,
    exclusions: &Exclusions,
    firsts: &[(Vec<usize>, Vec<usize>)],
    s: usize,
) -> Option<PairHit> {
    firsts
        .par_iter()
        .filter(|(x, _)| x.len() < s)
        .find_map_first(|(x, cx)| {
            let space = SearchSpace::new(data, exclusions, Some(x), cfg.forbid_same_attribute);
            let crit = PartnerCriterion {
                cx,
                x,
                bounds: &cfg.bounds,
                gamma: cfg.gamma,
            };
            let (w, cw) = space.first_of_size(s - x.len(), &crit)?;
            Some((x.clone(), cx.clone(), w, cw))
        })
}

/// Shortest (or longest, per `cfg.objective`) disjoint pair whose best gap
/// reaches `cfg.gamma`, ties broken lexicographically on `(x, w)`. `None`
/// certifies pairwise fairness at these bounds, gap and size limit.
pub fn pairwise_search(
    data: &Dataset,
    cfg: &PairwiseConfig,
    exclusions: &Exclusions,
) -> Result<Option<PairwiseFinding>> {
    cfg.bounds.check_len(data.k())?;
    let outer = SearchSpace::new(data, exclusions, None, cfg.forbid_same_attribute);
    let max_total = cfg.max_pair_size.min(outer.allowed().len());
    if max_total < 2 {
        return Ok(None);
    }
    // every candidate x with its counts, in lexicographic order
    let mut firsts: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    outer.preorder::<()>(max_total - 1, |chosen, counts| {
        firsts.push((chosen.to_vec(), counts.to_vec()));
        ControlFlow::Continue(())
    });
    let sizes: Vec<usize> = match cfg.objective {
        PairObjective::Shortest => (2..=max_total).collect(),
        PairObjective::Longest => (2..=max_total).rev().collect(),
    };
    for s in sizes {
        if let Some((x, cx, w, cw)) = first_pair_of_size(data, cfg, exclusions, &firsts, s) {
            let under_coverage = CoverageCounts::from_per_class(cx);
            let over_coverage = CoverageCounts::from_per_class(cw);
            let (gap, utilities) = pairwise_margin(&under_coverage, &over_coverage, &cfg.bounds)?;
            return Ok(Some(PairwiseFinding {
                under: Selector::from_indices(data.m(), &x)?,
                over: Selector::from_indices(data.m(), &w)?,
                under_coverage,
                over_coverage,
                utilities,
                gap,
            }));
        }
    }
    Ok(None)
}

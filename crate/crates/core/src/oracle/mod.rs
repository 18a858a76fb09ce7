//! Independent verifiers for the audits.
//!
//! [`brute_force_search`] enumerates every selector (or disjoint selector
//! pair) in the documented tie-break order, counts coverage one instance at
//! a time through [`covers`], and evaluates each audit's defining condition
//! directly: rational fractions for count audits and full box-corner
//! enumeration for utility audits. It shares no search machinery with the
//! audit modules.

pub mod fixtures;
mod monte_carlo;
mod msc;

use itertools::Itertools;

use crate::audit_count::{Comparison, CountConfig, CountFinding, Direction, ThresholdScale};
use crate::audit_pairwise::{PairObjective, PairwiseConfig, PairwiseFinding};
use crate::audit_utility::{UtilityBounds, UtilityConfig, UtilityFinding, UTILITY_TOLERANCE};
use crate::coverage::{covers, CoverageCounts, Selector};
use crate::dataset::Dataset;
use crate::enumeration::AuditMode;
use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::search::Exclusions;

pub use monte_carlo::{monte_carlo_expected_utility, MIN_TRIALS};
pub use msc::{extract_cover, reduce_msc_to_udsc, MscInstance, ReducedUdsc};

/// Largest `m` the exhaustive verifiers accept.
pub const BRUTE_FORCE_MAX_PSVS: usize = 16;

/// A finding of any audit mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    Count(CountFinding),
    Utility(UtilityFinding),
    Pairwise(PairwiseFinding),
}

impl Finding {
    /// Total number of PSVs involved.
    pub fn cardinality(&self) -> usize {
        match self {
            Finding::Count(f) => f.selector.cardinality(),
            Finding::Utility(f) => f.selector.cardinality(),
            Finding::Pairwise(f) => f.under.cardinality() + f.over.cardinality(),
        }
    }

    /// Target class, where the mode has one.
    pub fn target(&self) -> Option<usize> {
        match self {
            Finding::Count(f) => Some(f.target),
            Finding::Utility(f) => Some(f.target),
            Finding::Pairwise(_) => None,
        }
    }

    /// Selectors to exclude from later searches.
    pub fn selectors(&self) -> Vec<&Selector> {
        match self {
            Finding::Count(f) => vec![&f.selector],
            Finding::Utility(f) => vec![&f.selector],
            Finding::Pairwise(f) => vec![&f.under, &f.over],
        }
    }
}

/// First witness in the documented order, found by exhaustive enumeration.
pub fn brute_force_search(
    data: &Dataset,
    mode: &AuditMode,
    exclusions: &Exclusions,
) -> Result<Option<Finding>> {
    if data.m() > BRUTE_FORCE_MAX_PSVS {
        return Err(Error::TooManyPsvs {
            m: data.m(),
            max: BRUTE_FORCE_MAX_PSVS,
        });
    }
    Ok(match mode {
        AuditMode::Count(cfg) => brute_count(data, cfg, exclusions).map(Finding::Count),
        AuditMode::Utility(cfg) => brute_utility(data, cfg, exclusions)?.map(Finding::Utility),
        AuditMode::Pairwise(cfg) => brute_pairwise(data, cfg, exclusions)?.map(Finding::Pairwise),
    })
}

/// Per-class coverage computed instance by instance.
pub fn brute_counts(data: &Dataset, x: &Selector) -> CoverageCounts {
    let mut per_class = vec![0; data.k()];
    for i in 0..data.n() {
        if covers(x, data.row(i)).expect("selector sized to the dataset") {
            per_class[data.class_of(i)] += 1;
        }
    }
    CoverageCounts::from_per_class(per_class)
}

fn usable(data: &Dataset, idx: &[usize], exclusions: &Exclusions, forbid_same: bool) -> bool {
    let x = Selector::from_indices(data.m(), idx).expect("index in range");
    if !exclusions.permits(&x) {
        return false;
    }
    if forbid_same {
        let groups: Vec<usize> = idx
            .iter()
            .filter_map(|&j| data.schema().group_of(j))
            .collect();
        if groups.iter().unique().count() != groups.len() {
            return false;
        }
    }
    true
}

/// Candidate selectors of exactly `size` PSVs in lexicographic order.
fn of_size<'a>(
    data: &'a Dataset,
    size: usize,
    exclusions: &'a Exclusions,
    forbid_same: bool,
) -> impl Iterator<Item = Vec<usize>> + 'a {
    (0..data.m())
        .combinations(size)
        .filter(move |idx| usable(data, idx, exclusions, forbid_same))
}

fn brute_count(data: &Dataset, cfg: &CountConfig, exclusions: &Exclusions) -> Option<CountFinding> {
    let limit = cfg.max_size.unwrap_or(data.m()).min(data.m());
    let th = &cfg.thresholds;
    let (alpha, beta) = (th.alpha(), th.beta());
    let frac = |c: usize, s: usize| Ratio::new(c as i64, s as i64);
    // value compared against the thresholds
    let scaled = |c: usize, s: usize| match th.scale() {
        ThresholdScale::Fractional => frac(c, s),
        ThresholdScale::Absolute => Ratio::from_integer(c as i64),
    };
    let low = |c: usize, s: usize| scaled(c, s) <= alpha;
    let high = |c: usize, s: usize| scaled(c, s) >= beta;
    let sizes = data.class_sizes();
    for size in 1..=limit {
        for t in 0..data.k() {
            for idx in of_size(data, size, exclusions, cfg.forbid_same_attribute) {
                let x = Selector::from_indices(data.m(), &idx).expect("index in range");
                let cc = brute_counts(data, &x);
                let c = &cc.per_class;
                let (target_ok, side): (bool, &dyn Fn(usize, usize) -> bool) = match cfg.direction {
                    Direction::Under => (low(c[t], sizes[t]), &high),
                    Direction::Over => (high(c[t], sizes[t]), &low),
                };
                if !target_ok {
                    continue;
                }
                let rest_count = cc.population - c[t];
                let rest_size = data.n() - sizes[t];
                let others_ok = match cfg.comparison {
                    Comparison::EveryOther => (0..data.k())
                        .filter(|&k| k != t)
                        .all(|k| side(c[k], sizes[k])),
                    Comparison::PooledComplement => side(rest_count, rest_size),
                };
                if !others_ok {
                    continue;
                }
                let other_fraction = match cfg.comparison {
                    Comparison::PooledComplement => frac(rest_count, rest_size),
                    Comparison::EveryOther => {
                        let fs = (0..data.k())
                            .filter(|&k| k != t)
                            .map(|k| frac(c[k], sizes[k]));
                        match cfg.direction {
                            Direction::Under => fs.min(),
                            Direction::Over => fs.max(),
                        }
                        .expect("K >= 2")
                    }
                };
                return Some(CountFinding {
                    selector: x,
                    target: t,
                    target_fraction: frac(c[t], sizes[t]),
                    other_fraction,
                    coverage: cc,
                });
            }
        }
    }
    None
}

/// Every corner of the box, as utility vectors.
fn corners(bounds: &UtilityBounds) -> impl Iterator<Item = Vec<f64>> + '_ {
    let k = bounds.k();
    (0u32..(1 << k)).map(move |mask| {
        (0..k)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    bounds.upper()[i]
                } else {
                    bounds.lower()[i]
                }
            })
            .collect()
    })
}

fn check_corner_count(bounds: &UtilityBounds) -> Result<()> {
    if bounds.k() > BRUTE_FORCE_MAX_PSVS {
        return Err(Error::InvalidParameter(format!(
            "box-corner enumeration supports at most {BRUTE_FORCE_MAX_PSVS} classes"
        )));
    }
    Ok(())
}

/// `realized - expected` for utilities `u`.
fn shortfall(cc: &CoverageCounts, u: &[f64]) -> f64 {
    let realized: f64 = cc
        .per_class
        .iter()
        .zip(u)
        .map(|(&c, ui)| c as f64 * ui)
        .sum();
    realized - cc.population as f64 / u.len() as f64 * u.iter().sum::<f64>()
}

fn brute_utility(
    data: &Dataset,
    cfg: &UtilityConfig,
    exclusions: &Exclusions,
) -> Result<Option<UtilityFinding>> {
    cfg.bounds.check_len(data.k())?;
    check_corner_count(&cfg.bounds)?;
    let limit = cfg.max_size.unwrap_or(data.m()).min(data.m());
    for size in 1..=limit {
        for idx in of_size(data, size, exclusions, cfg.forbid_same_attribute) {
            let x = Selector::from_indices(data.m(), &idx).expect("index in range");
            let cc = brute_counts(data, &x);
            let (worst, u) = corners(&cfg.bounds).map(|u| (shortfall(&cc, &u), u)).fold(
                (f64::INFINITY, Vec::new()),
                |best, cur| {
                    if cur.0 < best.0 {
                        cur
                    } else {
                        best
                    }
                },
            );
            if -worst < cfg.gamma - UTILITY_TOLERANCE {
                continue;
            }
            let k = data.k();
            let target = (0..k)
                .map(|i| ((k * cc.per_class[i]) as f64 - cc.population as f64) * u[i])
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |b, (i, v)| if v < b.1 { (i, v) } else { b },
                )
                .0;
            let realized: f64 = cc
                .per_class
                .iter()
                .zip(&u)
                .map(|(&c, ui)| c as f64 * ui)
                .sum();
            let expected = cc.population as f64 / k as f64 * u.iter().sum::<f64>();
            return Ok(Some(UtilityFinding {
                selector: x,
                coverage: cc,
                utilities: u,
                realized,
                expected,
                margin: -worst,
                target,
            }));
        }
    }
    Ok(None)
}

/// Largest `sum_k U_k (cw_k - cx_k)` over the box corners.
fn corner_gap(cx: &CoverageCounts, cw: &CoverageCounts, bounds: &UtilityBounds) -> (f64, Vec<f64>) {
    corners(bounds)
        .map(|u| {
            let g: f64 = (0..u.len())
                .map(|k| u[k] * (cw.per_class[k] as f64 - cx.per_class[k] as f64))
                .sum();
            (g, u)
        })
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
}

fn brute_pairwise(
    data: &Dataset,
    cfg: &PairwiseConfig,
    exclusions: &Exclusions,
) -> Result<Option<PairwiseFinding>> {
    cfg.bounds.check_len(data.k())?;
    check_corner_count(&cfg.bounds)?;
    let m = data.m();
    let max_total = cfg.max_pair_size.min(m);
    let totals: Vec<usize> = match cfg.objective {
        PairObjective::Shortest => (2..=max_total).collect(),
        PairObjective::Longest => (2..=max_total).rev().collect(),
    };
    let forbid = cfg.forbid_same_attribute;
    for s in totals {
        let mut xs: Vec<Vec<usize>> = (1..s)
            .flat_map(|a| of_size(data, a, exclusions, forbid).collect::<Vec<_>>())
            .collect();
        xs.sort();
        for x in xs {
            let sx = Selector::from_indices(m, &x).expect("index in range");
            let cx = brute_counts(data, &sx);
            let rest: Vec<usize> = (0..m).filter(|j| !x.contains(j)).collect();
            for w in rest.iter().copied().combinations(s - x.len()) {
                if !usable(data, &w, exclusions, forbid) {
                    continue;
                }
                let sw = Selector::from_indices(m, &w).expect("index in range");
                debug_assert!(sx.is_disjoint(&sw));
                let cw = brute_counts(data, &sw);
                let (forward, u) = corner_gap(&cx, &cw, &cfg.bounds);
                if forward < cfg.gamma - UTILITY_TOLERANCE {
                    continue;
                }
                let (backward, _) = corner_gap(&cw, &cx, &cfg.bounds);
                let canonical = if (forward - backward).abs() <= UTILITY_TOLERANCE {
                    x < w
                } else {
                    forward > backward
                };
                if !canonical {
                    continue;
                }
                return Ok(Some(PairwiseFinding {
                    under: sx,
                    over: sw,
                    under_coverage: cx,
                    over_coverage: cw,
                    utilities: u,
                    gap: forward,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit_count::CountThresholds;
    use crate::audit_utility::UtilityConfig;

    #[test]
    fn d1_count_matches_hand_result() {
        let cfg = CountConfig::new(
            CountThresholds::fractional(Ratio::new(1, 5), Ratio::new(1, 2)).unwrap(),
        );
        let f = brute_force_search(&fixtures::d1(), &AuditMode::Count(cfg), &Exclusions::none())
            .unwrap()
            .unwrap();
        let Finding::Count(f) = f else {
            panic!("count finding expected")
        };
        assert_eq!(f.selector, Selector::from_bits(&[0, 1, 0]));
        assert_eq!(f.target, 0);
    }

    #[test]
    fn d2_utility_witness() {
        let bounds = UtilityBounds::new(vec![1.0, 1.0], vec![1.0, 4.0]).unwrap();
        let mode = AuditMode::Utility(UtilityConfig::new(bounds, 6.0).unwrap());
        let Some(Finding::Utility(f)) =
            brute_force_search(&fixtures::d2(), &mode, &Exclusions::none()).unwrap()
        else {
            panic!("utility finding expected")
        };
        assert_eq!(f.selector, fixtures::d2_selector());
        assert_eq!(f.utilities, vec![1.0, 4.0]);
        assert_eq!((f.realized, f.expected, f.margin), (14.0, 20.0, 6.0));
    }

    #[test]
    fn infeasible_configuration_is_absent() {
        let cfg = CountConfig::new(
            CountThresholds::fractional(Ratio::new(0, 1), Ratio::new(1, 1)).unwrap(),
        );
        let found =
            brute_force_search(&fixtures::d2(), &AuditMode::Count(cfg), &Exclusions::none())
                .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn too_many_psvs_rejected() {
        let d = crate::synth::random_fixture(16, 40, 2, 0).unwrap();
        let names: Vec<String> = (0..17).map(|j| format!("p{j}")).collect();
        let rows: Vec<(Vec<u8>, usize)> =
            (0..4).map(|i| (vec![(i % 2) as u8; 17], i % 2)).collect();
        let rows: Vec<(&[u8], usize)> = rows.iter().map(|(r, c)| (r.as_slice(), *c)).collect();
        let big = Dataset::from_rows(&names, &["a", "b"], &rows).unwrap();
        let cfg = CountConfig::new(
            CountThresholds::fractional(Ratio::new(1, 5), Ratio::new(1, 2)).unwrap(),
        );
        assert!(brute_force_search(
            &d,
            &AuditMode::Count(cfg.clone().max_size(1)),
            &Exclusions::none()
        )
        .is_ok());
        assert!(matches!(
            brute_force_search(&big, &AuditMode::Count(cfg), &Exclusions::none()),
            Err(Error::TooManyPsvs { m: 17, max: 16 })
        ));
    }
}

//! Count-based unfairness: a group under-represented in one target class and
//! over-represented in every other class.
//!
//! With thresholds `alpha < beta`, selector `x` is a witness for target `t`
//! when `c_t <= alpha * |C_t|` and `c_k >= beta * |C_k|` for every `k != t`.
//! The search returns a witness of minimum cardinality.
//!
//! Two properties make the search exact without an integer program. The
//! covered-instance indicators are a function of `x`, so they are counted
//! directly. Coverage only grows as PSVs are added, so a selector that
//! already exceeds the target bound has no feasible superset, and a branch
//! whose optimistic coverage misses some lower bound can be cut.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{coverage_counts, CoverageCounts, Selector};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ratio::{self, is_nonnegative, Ratio};
use crate::search::{Criterion, Exclusions, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdScale {
    /// `alpha`, `beta` are fractions of the class size.
    #[default]
    Fractional,
    /// `alpha`, `beta` are absolute instance counts.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountThresholds {
    #[serde(with = "ratio::serde_ratio")]
    alpha: Ratio,
    #[serde(with = "ratio::serde_ratio")]
    beta: Ratio,
    scale: ThresholdScale,
}

impl CountThresholds {
    /// Fractional thresholds with `0 <= alpha < beta <= 1`.
    pub fn fractional(alpha: Ratio, beta: Ratio) -> Result<Self> {
        if !is_nonnegative(&alpha) || beta > Ratio::from_integer(1) || alpha >= beta {
            return Err(Error::InvalidThresholds(format!(
                "need 0 ≤ α < β ≤ 1, got α = {}, β = {}",
                ratio::format_ratio(&alpha),
                ratio::format_ratio(&beta)
            )));
        }
        Ok(CountThresholds {
            alpha,
            beta,
            scale: ThresholdScale::Fractional,
        })
    }

    /// Absolute instance-count thresholds with `alpha < beta`.
    pub fn absolute(alpha: u64, beta: u64) -> Result<Self> {
        if alpha >= beta {
            return Err(Error::InvalidThresholds(format!(
                "need α < β, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(CountThresholds {
            alpha: Ratio::from_integer(alpha as i64),
            beta: Ratio::from_integer(beta as i64),
            scale: ThresholdScale::Absolute,
        })
    }

    pub fn from_gap(beta: Ratio, gamma: Ratio) -> Result<Self> {
        Self::fractional(beta - gamma, beta)
    }

    pub fn alpha(&self) -> Ratio {
        self.alpha
    }

    pub fn beta(&self) -> Ratio {
        self.beta
    }

    /// The disparity gap `beta - alpha`.
    pub fn gamma(&self) -> Ratio {
        self.beta - self.alpha
    }

    pub fn scale(&self) -> ThresholdScale {
        self.scale
    }

    #[inline]
    pub fn at_most_alpha(&self, count: usize, size: usize) -> bool {
        match self.scale {
            ThresholdScale::Fractional => ratio::count_at_most(count, &self.alpha, size),
            ThresholdScale::Absolute => ratio::count_at_most(count, &self.alpha, 1),
        }
    }

    #[inline]
    pub fn at_least_beta(&self, count: usize, size: usize) -> bool {
        match self.scale {
            ThresholdScale::Fractional => ratio::count_at_least(count, &self.beta, size),
            ThresholdScale::Absolute => ratio::count_at_least(count, &self.beta, 1),
        }
    }
}

/// Which side of the target is tested against `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Target covered at most `alpha`, others at least `beta`.
    #[default]
    Under,
    /// Target covered at least `beta`, others at most `alpha`.
    Over,
}

/// What the target class is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Each other class separately.
    #[default]
    EveryOther,
    /// The union of all other classes.
    PooledComplement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountConfig {
    pub thresholds: CountThresholds,
    /// Largest selector considered; `None` means `m`.
    pub max_size: Option<usize>,
    pub direction: Direction,
    pub comparison: Comparison,
    /// Reject selectors holding two PSVs of one one-hot attribute.
    pub forbid_same_attribute: bool,
}

impl CountConfig {
    pub fn new(thresholds: CountThresholds) -> Self {
        CountConfig {
            thresholds,
            max_size: None,
            direction: Direction::Under,
            comparison: Comparison::EveryOther,
            forbid_same_attribute: false,
        }
    }

    pub fn max_size(mut self, max_size: usize) -> Self {
        self.max_size = Some(max_size);
        self
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    pub fn forbid_same_attribute(mut self, forbid: bool) -> Self {
        self.forbid_same_attribute = forbid;
        self
    }

    pub(crate) fn size_limit(&self, m: usize) -> usize {
        self.max_size.unwrap_or(m).min(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountFinding {
    pub selector: Selector,
    pub target: usize,
    pub coverage: CoverageCounts,
    /// `c_t / |C_t|`.
    pub target_fraction: Ratio,
    /// The binding comparison fraction: the smallest other-class fraction
    /// (largest, for [`Direction::Over`]) or the pooled complement fraction.
    pub other_fraction: Ratio,
}

/// The per-target constraint system over per-class counts.
pub(crate) struct CountCriterion<'c> {
    thresholds: &'c CountThresholds,
    direction: Direction,
    comparison: Comparison,
    target: usize,
    sizes: Vec<usize>,
    n: usize,
}

impl<'c> CountCriterion<'c> {
    pub(crate) fn new(data: &Dataset, target: usize, cfg: &'c CountConfig) -> Self {
        CountCriterion {
            thresholds: &cfg.thresholds,
            direction: cfg.direction,
            comparison: cfg.comparison,
            target,
            sizes: data.class_sizes().to_vec(),
            n: data.n(),
        }
    }

    /// Bound checks on the target's side and the comparison side. `upper`
    /// counts feed the anti-monotone (at most) constraints and `lower` counts
    /// the monotone (at least) ones.
    fn check(&self, upper: &[usize], lower: &[usize]) -> bool {
        let t = self.target;
        let th = self.thresholds;
        let under = self.direction == Direction::Under;
        // target side, then each comparison side
        let target_ok = if under {
            th.at_most_alpha(upper[t], self.sizes[t])
        } else {
            th.at_least_beta(lower[t], self.sizes[t])
        };
        if !target_ok {
            return false;
        }
        let counts = if under { lower } else { upper };
        let side_ok = |count: usize, size: usize| {
            if under {
                th.at_least_beta(count, size)
            } else {
                th.at_most_alpha(count, size)
            }
        };
        match self.comparison {
            Comparison::EveryOther => (0..self.sizes.len())
                .filter(|&k| k != t)
                .all(|k| side_ok(counts[k], self.sizes[k])),
            Comparison::PooledComplement => {
                let rest: usize = counts.iter().sum::<usize>() - counts[t];
                side_ok(rest, self.n - self.sizes[t])
            }
        }
    }

    fn fractions(&self, counts: &[usize]) -> (Ratio, Ratio) {
        let t = self.target;
        let frac = |c: usize, s: usize| Ratio::new(c as i64, s as i64);
        let target = frac(counts[t], self.sizes[t]);
        let other = match self.comparison {
            Comparison::PooledComplement => {
                let rest: usize = counts.iter().sum::<usize>() - counts[t];
                frac(rest, self.n - self.sizes[t])
            }
            Comparison::EveryOther => {
                let others = (0..counts.len())
                    .filter(|&k| k != t)
                    .map(|k| frac(counts[k], self.sizes[k]));
                match self.direction {
                    Direction::Under => others.min(),
                    Direction::Over => others.max(),
                }
                .expect("K >= 2")
            }
        };
        (target, other)
    }
}

impl Criterion for CountCriterion<'_> {
    fn prune(&self, current: &[usize], optimistic: &[usize]) -> bool {
        !self.check(current, optimistic)
    }

    fn accept(&self, counts: &[usize], _chosen: &[usize]) -> bool {
        self.check(counts, counts)
    }
}

/// Whether `x` witnesses count-based unfairness against `target`.
pub fn udsc_feasible(
    data: &Dataset,
    target: usize,
    x: &Selector,
    cfg: &CountConfig,
) -> Result<bool> {
    data.check_class(target)?;
    let cc = coverage_counts(data, x)?;
    Ok(CountCriterion::new(data, target, cfg).accept(&cc.per_class, &[]))
}

/// Per-class-count form of [`udsc_feasible`], for callers that already have counts.
pub fn count_feasible(data: &Dataset, target: usize, counts: &[usize], cfg: &CountConfig) -> bool {
    CountCriterion::new(data, target, cfg).accept(counts, &[])
}

fn finding(
    data: &Dataset,
    crit: &CountCriterion<'_>,
    chosen: Vec<usize>,
    counts: Vec<usize>,
) -> CountFinding {
    let (target_fraction, other_fraction) = crit.fractions(&counts);
    CountFinding {
        selector: Selector::from_indices(data.m(), &chosen).expect("indices from the search"),
        target: crit.target,
        coverage: CoverageCounts::from_per_class(counts),
        target_fraction,
        other_fraction,
    }
}

/// Minimum-cardinality witness against `target`, ties broken by the
/// lexicographically smallest index list.
pub fn udsc_search(
    data: &Dataset,
    target: usize,
    cfg: &CountConfig,
    exclusions: &Exclusions,
) -> Result<Option<CountFinding>> {
    data.check_class(target)?;
    let space = SearchSpace::new(data, exclusions, None, cfg.forbid_same_attribute);
    let crit = CountCriterion::new(data, target, cfg);
    for size in 1..=cfg.size_limit(data.m()) {
        if let Some((chosen, counts)) = space.first_of_size(size, &crit) {
            return Ok(Some(finding(data, &crit, chosen, counts)));
        }
    }
    Ok(None)
}

/// Run the search with every class as target and return the overall
/// shortest witness (ties: smaller target, then lexicographic selector).
/// `None` means the partition is count-fair at these settings.
pub fn audit_count_all(
    data: &Dataset,
    cfg: &CountConfig,
    exclusions: &Exclusions,
) -> Option<CountFinding> {
    let space = SearchSpace::new(data, exclusions, None, cfg.forbid_same_attribute);
    let criteria: Vec<CountCriterion<'_>> = (0..data.k())
        .map(|t| CountCriterion::new(data, t, cfg))
        .collect();
    for size in 1..=cfg.size_limit(data.m()) {
        let hits: Vec<Option<(Vec<usize>, Vec<usize>)>> = criteria
            .par_iter()
            .map(|crit| space.first_of_size(size, crit))
            .collect();
        if let Some((t, (chosen, counts))) = hits
            .into_iter()
            .enumerate()
            .find_map(|(t, hit)| hit.map(|h| (t, h)))
        {
            return Some(finding(data, &criteria[t], chosen, counts));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fixtures;
    use crate::search::ExclusionMode;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::new(n, d)
    }

    fn d1_config() -> CountConfig {
        CountConfig::new(CountThresholds::fractional(r(1, 5), r(1, 2)).unwrap())
    }

    #[test]
    fn threshold_validation() {
        assert!(CountThresholds::fractional(r(1, 2), r(1, 2)).is_err());
        assert!(CountThresholds::fractional(r(1, 1), r(1, 1)).is_err());
        assert!(CountThresholds::fractional(r(-1, 5), r(1, 2)).is_err());
        assert!(CountThresholds::fractional(r(1, 5), r(6, 5)).is_err());
        assert!(CountThresholds::absolute(3, 3).is_err());
        let t = CountThresholds::fractional(r(1, 5), r(1, 2)).unwrap();
        assert_eq!(t.gamma(), r(3, 10));
    }

    #[test]
    fn d1_feasibility() {
        let d1 = fixtures::d1();
        let cfg = d1_config();
        assert!(udsc_feasible(&d1, 0, &Selector::from_bits(&[0, 1, 0]), &cfg).unwrap());
        assert!(!udsc_feasible(&d1, 0, &Selector::from_bits(&[1, 0, 0]), &cfg).unwrap());
        assert!(!udsc_feasible(&d1, 0, &Selector::empty(3), &cfg).unwrap());
        assert!(udsc_feasible(&d1, 7, &Selector::empty(3), &cfg).is_err());
    }

    #[test]
    fn d1_search_finds_low_income() {
        let d1 = fixtures::d1();
        let f = udsc_search(&d1, 0, &d1_config().max_size(3), &Exclusions::none())
            .unwrap()
            .unwrap();
        assert_eq!(f.selector, Selector::from_bits(&[0, 1, 0]));
        assert_eq!(f.selector.cardinality(), 1);
        assert_eq!(f.target_fraction, r(0, 1));
        assert_eq!(f.other_fraction, r(3, 4));
        assert!(udsc_search(&d1, 1, &d1_config(), &Exclusions::none())
            .unwrap()
            .is_none());
    }

    #[test]
    fn d1_all_targets() {
        let f = audit_count_all(&fixtures::d1(), &d1_config(), &Exclusions::none()).unwrap();
        assert_eq!(f.target, 0);
        assert_eq!(f.selector.indices(), vec![1]);
    }

    #[test]
    fn identical_classes_are_fair() {
        let rows: Vec<(&[u8], usize)> = vec![
            (&[1, 0, 1], 0),
            (&[0, 1, 0], 0),
            (&[1, 1, 0], 0),
            (&[1, 0, 1], 1),
            (&[0, 1, 0], 1),
            (&[1, 1, 0], 1),
        ];
        let d = Dataset::from_rows(&["a", "b", "c"], &["x", "y"], &rows).unwrap();
        for (a, b) in [
            (r(0, 1), r(1, 100)),
            (r(1, 5), r(1, 2)),
            (r(9, 10), r(1, 1)),
        ] {
            let cfg = CountConfig::new(CountThresholds::fractional(a, b).unwrap());
            assert!(audit_count_all(&d, &cfg, &Exclusions::none()).is_none());
        }
    }

    #[test]
    fn d2_is_count_fair() {
        let d2 = fixtures::d2();
        let cfg = CountConfig::new(CountThresholds::fractional(r(1, 5), r(1, 4)).unwrap());
        assert!(audit_count_all(&d2, &cfg, &Exclusions::none()).is_none());
        let pooled = cfg.comparison(Comparison::PooledComplement);
        assert!(audit_count_all(&d2, &pooled, &Exclusions::none()).is_none());
    }

    #[test]
    fn msc_fixture_needs_two_psvs() {
        let (inst, _) = fixtures::r1();
        let reduced = crate::oracle::reduce_msc_to_udsc(&inst).unwrap();
        let cfg = CountConfig::new(reduced.thresholds.clone());
        let f = udsc_search(&reduced.data, reduced.target, &cfg, &Exclusions::none())
            .unwrap()
            .unwrap();
        assert_eq!(f.selector.indices(), vec![0, 1]);
    }

    #[test]
    fn over_direction_swaps_roles() {
        let d1 = fixtures::d1();
        // LowIncome covers 3/4 of class 1 and none of class 0.
        let cfg = d1_config().direction(Direction::Over);
        let f = audit_count_all(&d1, &cfg, &Exclusions::none()).unwrap();
        assert_eq!(f.target, 1);
        assert_eq!(f.selector.indices(), vec![1]);
        assert_eq!(f.target_fraction, r(3, 4));
        assert_eq!(f.other_fraction, r(0, 1));
    }

    #[test]
    fn exclusions_are_respected() {
        let d1 = fixtures::d1();
        let excl = Exclusions::new(
            ExclusionMode::Disjoint,
            vec![Selector::from_bits(&[0, 1, 0])],
        );
        assert!(audit_count_all(&d1, &d1_config(), &excl).is_none());
    }

    #[test]
    fn max_size_bounds_the_search() {
        let (inst, _) = fixtures::r1();
        let reduced = crate::oracle::reduce_msc_to_udsc(&inst).unwrap();
        let cfg = CountConfig::new(reduced.thresholds.clone()).max_size(1);
        assert!(udsc_search(&reduced.data, 0, &cfg, &Exclusions::none())
            .unwrap()
            .is_none());
    }
}

//! Utility-weighted unfairness.
//!
//! Class `k` carries a utility `U_k` chosen from an expert-supplied box
//! `[a_k, b_k]`. A group covered by `x` realizes `sum_k c_k U_k`; spread
//! uniformly at random over the `K` classes it would expect
//! `(N_x / K) sum_k U_k`. The partition is unfair at gap `gamma` when some
//! `x` and some box-feasible `U` leave the realized utility at least `gamma`
//! below the expectation.
//!
//! For fixed `x` the shortfall is linear and separable in `U`:
//! `realized - expected = sum_k e_k U_k` with `e_k = c_k - N_x / K`. Its
//! minimum over the box sits at the corner taking `b_k` where `e_k < 0` and
//! `a_k` elsewhere, so no LP solver is needed.

use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageCounts, Selector};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::search::{Criterion, Exclusions, SearchSpace};

/// Tolerance on margin-versus-gap comparisons.
pub const UTILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl UtilityBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(Error::InvalidBounds(format!(
                    "class {k}: need finite a ≤ b, got [{a}, {b}]"
                )));
            }
        }
        Ok(UtilityBounds { lower, upper })
    }

    /// The degenerate box `a_k = b_k = u_k`.
    pub fn fixed(utilities: Vec<f64>) -> Result<Self> {
        UtilityBounds::new(utilities.clone(), utilities)
    }

    /// The same box for each of `k` classes.
    pub fn uniform(k: usize, lower: f64, upper: f64) -> Result<Self> {
        UtilityBounds::new(vec![lower; k], vec![upper; k])
    }

    pub fn k(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn check_len(&self, k: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::InvalidBounds(format!(
                "expected {k} utility bounds, one per class, got {}",
                self.k()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityConfig {
    pub bounds: UtilityBounds,
    pub gamma: f64,
    pub max_size: Option<usize>,
    pub forbid_same_attribute: bool,
}

impl UtilityConfig {
    pub fn new(bounds: UtilityBounds, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "γ must be positive, got {gamma}"
            )));
        }
        Ok(UtilityConfig {
            bounds,
            gamma,
            max_size: None,
            forbid_same_attribute: false,
        })
    }

    pub fn max_size(mut self, max_size: usize) -> Self {
        self.max_size = Some(max_size);
        self
    }

    pub fn forbid_same_attribute(mut self, forbid: bool) -> Self {
        self.forbid_same_attribute = forbid;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityFinding {
    pub selector: Selector,
    pub coverage: CoverageCounts,
    /// Witness utilities, one per class, inside the bounds.
    pub utilities: Vec<f64>,
    /// `sum_k c_k U_k`.
    pub realized: f64,
    /// `(N_x / K) sum_k U_k`.
    pub expected: f64,
    /// `expected - realized`, at least `gamma` (within tolerance).
    pub margin: f64,
    /// Class contributing the most negative term `e_k U_k` to the shortfall
    /// (ties: smallest index); used to attribute findings to classes.
    pub target: usize,
}

/// Expected total utility of `n_x` instances spread uniformly at random over
/// the classes: `(n_x / K) sum_k U_k`.
pub fn expected_random_utility(n_x: usize, utilities: &[f64]) -> f64 {
    if utilities.is_empty() {
        return 0.0;
    }
    n_x as f64 * utilities.iter().sum::<f64>() / utilities.len() as f64
}

/// Minimizing corner of the box for `sum_k e_k U_k`, where the sign of
/// `e_k` is read exactly from `K c_k - N_x`. Returns `(worst, witness)`.
fn worst_corner(counts: &[usize], bounds: &UtilityBounds, witness: &mut Vec<f64>) -> f64 {
    let k = counts.len();
    let total: usize = counts.iter().sum();
    witness.clear();
    let mut sum = 0.0;
    for (c, (a, b)) in counts.iter().zip(bounds.lower.iter().zip(&bounds.upper)) {
        let scaled = (k * c) as f64 - total as f64; // K e_k, exact
        let u = if (k * c) < total { *b } else { *a };
        witness.push(u);
        sum += scaled * u;
    }
    sum / k as f64
}

/// `(worst_margin, witness)`: the minimum over the box of
/// `sum_k c_k U_k - (N_x / K) sum_k U_k` and a minimizing `U`. The group is
/// utility-unfair at gap `gamma` iff `worst_margin <= -gamma`.
pub fn utility_margin(cc: &CoverageCounts, bounds: &UtilityBounds) -> Result<(f64, Vec<f64>)> {
    bounds.check_len(cc.k())?;
    let mut witness = Vec::with_capacity(cc.k());
    let worst = worst_corner(&cc.per_class, bounds, &mut witness);
    Ok((worst, witness))
}

/// Gap test shared by the search and the oracle.
#[inline]
pub fn reaches_gap(margin: f64, gamma: f64) -> bool {
    margin >= gamma - UTILITY_TOLERANCE
}

pub(crate) struct UtilityCriterion<'c> {
    bounds: &'c UtilityBounds,
    gamma: f64,
    scratch: std::cell::RefCell<Vec<f64>>,
}

impl<'c> UtilityCriterion<'c> {
    pub(crate) fn new(cfg: &'c UtilityConfig) -> Self {
        UtilityCriterion {
            bounds: &cfg.bounds,
            gamma: cfg.gamma,
            scratch: std::cell::RefCell::new(Vec::new()),
        }
    }

    /// Lower bound of the worst margin over every selector whose per-class
    /// counts lie between `lo` and `hi`, by interval arithmetic on `e_k`.
    fn margin_lower_bound(&self, lo: &[usize], hi: &[usize]) -> (f64, f64) {
        let k = lo.len() as f64;
        let n_lo: usize = lo.iter().sum();
        let n_hi: usize = hi.iter().sum();
        let mut bound = 0.0;
        let mut magnitude = 0.0;
        for (i, (a, b)) in self.bounds.lower.iter().zip(&self.bounds.upper).enumerate() {
            let e_lo = lo[i] as f64 - n_hi as f64 / k;
            let e_hi = hi[i] as f64 - n_lo as f64 / k;
            let term = [a * e_lo, a * e_hi, b * e_lo, b * e_hi]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            magnitude += term.abs();
            bound += term;
        }
        (bound, magnitude)
    }
}

impl Criterion for UtilityCriterion<'_> {
    fn prune(&self, current: &[usize], optimistic: &[usize]) -> bool {
        let (bound, magnitude) = self.margin_lower_bound(current, optimistic);
        // slack absorbs rounding differences between the bound and the leaf test
        let slack = 1e-9 * (1.0 + magnitude);
        -bound < self.gamma - UTILITY_TOLERANCE - slack
    }

    fn accept(&self, counts: &[usize], _chosen: &[usize]) -> bool {
        let mut w = self.scratch.borrow_mut();
        reaches_gap(-worst_corner(counts, self.bounds, &mut w), self.gamma)
    }
}

pub(crate) fn make_finding(
    data: &Dataset,
    chosen: &[usize],
    counts: Vec<usize>,
    bounds: &UtilityBounds,
) -> UtilityFinding {
    let cc = CoverageCounts::from_per_class(counts);
    let (worst, utilities) = utility_margin(&cc, bounds).expect("bounds checked");
    let realized: f64 = cc
        .per_class
        .iter()
        .zip(&utilities)
        .map(|(&c, u)| c as f64 * u)
        .sum();
    let expected = expected_random_utility(cc.population, &utilities);
    let k = cc.k();
    let target = (0..k)
        .map(|i| {
            let scaled = (k * cc.per_class[i]) as f64 - cc.population as f64;
            (i, scaled * utilities[i])
        })
        .fold(
            (0, f64::INFINITY),
            |best, (i, v)| if v < best.1 { (i, v) } else { best },
        )
        .0;
    UtilityFinding {
        selector: Selector::from_indices(data.m(), chosen).expect("indices from the search"),
        coverage: cc,
        utilities,
        realized,
        expected,
        margin: -worst,
        target,
    }
}

/// Minimum-cardinality selector (ties: lexicographic) that is utility-unfair
/// at `cfg.gamma`, with witness utilities. `None` certifies fairness at
/// these bounds, gap and size limit.
pub fn utility_search(
    data: &Dataset,
    cfg: &UtilityConfig,
    exclusions: &Exclusions,
) -> Result<Option<UtilityFinding>> {
    cfg.bounds.check_len(data.k())?;
    let space = SearchSpace::new(data, exclusions, None, cfg.forbid_same_attribute);
    let crit = UtilityCriterion::new(cfg);
    let limit = cfg.max_size.unwrap_or(data.m()).min(data.m());
    for size in 1..=limit {
        if let Some((chosen, counts)) = space.first_of_size(size, &crit) {
            return Ok(Some(make_finding(data, &chosen, counts, &cfg.bounds)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::coverage_counts;
    use crate::oracle::fixtures;
    use crate::synth::random_fixture;
    use proptest::prelude::*;

    fn cc(per_class: &[usize]) -> CoverageCounts {
        CoverageCounts::from_per_class(per_class.to_vec())
    }

    #[test]
    fn expected_utility_examples() {
        assert_eq!(expected_random_utility(8, &[1.0, 4.0]), 20.0);
        assert_eq!(expected_random_utility(7, &[2.5, 2.5, 2.5]), 17.5);
        assert_eq!(expected_random_utility(0, &[3.0, 9.0]), 0.0);
    }

    #[test]
    fn d2_margin() {
        let b = UtilityBounds::new(vec![1.0, 1.0], vec![1.0, 4.0]).unwrap();
        let (worst, u) = utility_margin(&cc(&[6, 2]), &b).unwrap();
        assert_eq!(u, vec![1.0, 4.0]);
        assert_eq!(worst, -6.0);
    }

    #[test]
    fn degenerate_box_on_balanced_counts() {
        let b = UtilityBounds::fixed(vec![1.0, 1.0, 1.0]).unwrap();
        let (worst, _) = utility_margin(&cc(&[3, 3, 3]), &b).unwrap();
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn corner_example_with_zero_lower_bounds() {
        let b = UtilityBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let (worst, u) = utility_margin(&cc(&[0, 3]), &b).unwrap();
        assert_eq!(u, vec![1.0, 0.0]);
        assert_eq!(worst, -1.5);
    }

    #[test]
    fn bounds_validation() {
        assert!(UtilityBounds::new(vec![2.0], vec![1.0]).is_err());
        assert!(UtilityBounds::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(UtilityBounds::new(vec![f64::NAN], vec![1.0]).is_err());
        let b = UtilityBounds::uniform(3, 0.0, 1.0).unwrap();
        assert!(utility_margin(&cc(&[1, 2]), &b).is_err());
        assert!(UtilityConfig::new(b, 0.0).is_err());
    }

    #[test]
    fn d2_search_threshold() {
        let d2 = fixtures::d2();
        let bounds = UtilityBounds::new(vec![1.0, 1.0], vec![1.0, 4.0]).unwrap();
        let cfg = UtilityConfig::new(bounds.clone(), 6.0).unwrap();
        let f = utility_search(&d2, &cfg, &Exclusions::none())
            .unwrap()
            .unwrap();
        assert_eq!(f.selector, fixtures::d2_selector());
        assert_eq!(f.utilities, vec![1.0, 4.0]);
        assert_eq!(f.realized, 14.0);
        assert_eq!(f.expected, 20.0);
        assert_eq!(f.margin, 6.0);
        assert_eq!(f.target, 1);
        let cfg = UtilityConfig::new(bounds, 6.01).unwrap();
        assert!(utility_search(&d2, &cfg, &Exclusions::none())
            .unwrap()
            .is_none());
    }

    #[test]
    fn equal_utilities_never_flag() {
        let d = random_fixture(5, 60, 3, 9).unwrap();
        let cfg = UtilityConfig::new(UtilityBounds::fixed(vec![1.0; 3]).unwrap(), 1e-6).unwrap();
        assert!(utility_search(&d, &cfg, &Exclusions::none())
            .unwrap()
            .is_none());
    }

    proptest! {
        #[test]
        fn margin_is_minimum_over_box_corners(
            counts in proptest::collection::vec(0usize..40, 1..5),
            boxes in proptest::collection::vec((-5.0f64..5.0, 0.0f64..5.0), 4),
        ) {
            let k = counts.len();
            let lower: Vec<f64> = boxes[..k].iter().map(|(a, _)| *a).collect();
            let upper: Vec<f64> = boxes[..k].iter().map(|(a, w)| a + w).collect();
            let b = UtilityBounds::new(lower.clone(), upper.clone()).unwrap();
            let c = cc(&counts);
            let (worst, witness) = utility_margin(&c, &b).unwrap();
            let n = c.population as f64;
            let eval = |u: &[f64]| -> f64 {
                counts.iter().zip(u).map(|(&ci, ui)| ci as f64 * ui).sum::<f64>()
                    - n / k as f64 * u.iter().sum::<f64>()
            };
            let mut best = f64::INFINITY;
            for mask in 0..(1u32 << k) {
                let u: Vec<f64> = (0..k)
                    .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                    .collect();
                best = best.min(eval(&u));
            }
            prop_assert!((worst - best).abs() <= 1e-9 * (1.0 + best.abs()));
            prop_assert!((eval(&witness) - worst).abs() <= 1e-9 * (1.0 + worst.abs()));
            for (i, u) in witness.iter().enumerate() {
                prop_assert!(lower[i] <= *u && *u <= upper[i]);
            }
        }

        #[test]
        fn unit_box_margin_is_zero(seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 4)) {
            let d = random_fixture(4, 50, 3, seed).unwrap();
            let x = Selector::from_bits(&bits.iter().map(|&b| b as u8).collect::<Vec<_>>());
            let c = coverage_counts(&d, &x).unwrap();
            let (worst, _) = utility_margin(&c, &UtilityBounds::fixed(vec![1.0; 3]).unwrap()).unwrap();
            prop_assert!(worst.abs() < 1e-12);
        }
    }
}

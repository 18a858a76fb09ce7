//! Disjunctive coverage of instances by PSV selectors.

use std::fmt;

use crate::bits::BitSet;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// A subset of PSVs, read as their disjunction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Selector(BitSet);

impl Selector {
    pub fn empty(m: usize) -> Self {
        Selector(BitSet::new(m))
    }

    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        BitSet::from_indices(m, indices)
            .map(Selector)
            .ok_or_else(|| Error::InvalidParameter(format!("PSV index out of range for m = {m}")))
    }

    /// From a 0/1 pattern, e.g. `&[0, 1, 0]`.
    pub fn from_bits(bits: &[u8]) -> Self {
        Selector(BitSet::from_bools(bits.iter().map(|&b| b != 0)))
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.any()
    }

    /// Number of selected PSVs.
    pub fn cardinality(&self) -> usize {
        self.0.count_ones()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.get(j)
    }

    /// Selected PSV indices in increasing order. Comparing these vectors
    /// lexicographically is the tie-break order used by every search.
    pub fn indices(&self) -> Vec<usize> {
        self.0.iter_ones().collect()
    }

    /// One `0`/`1` entry per PSV; the inverse of [`Selector::from_bits`].
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len()).map(|j| self.contains(j) as u8).collect()
    }

    pub fn is_disjoint(&self, other: &Selector) -> bool {
        !self.0.intersects(&other.0)
    }

    pub fn names<'a>(&self, data: &'a Dataset) -> Vec<&'a str> {
        self.0.iter_ones().map(|j| data.schema().name(j)).collect()
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selector{:?}", self.indices())
    }
}

/// Per-class covered counts `c_k` and their total `N_x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageCounts {
    pub per_class: Vec<usize>,
    pub population: usize,
}

impl CoverageCounts {
    pub fn from_per_class(per_class: Vec<usize>) -> Self {
        let population = per_class.iter().sum();
        CoverageCounts {
            per_class,
            population,
        }
    }

    pub fn k(&self) -> usize {
        self.per_class.len()
    }
}

/// True iff some selected PSV is set in `instance`.
pub fn covers(x: &Selector, instance: &BitSet) -> Result<bool> {
    if x.len() != instance.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: instance.len(),
        });
    }
    Ok(x.bits().intersects(instance))
}

pub fn coverage_counts(data: &Dataset, x: &Selector) -> Result<CoverageCounts> {
    if x.len() != data.m() {
        return Err(Error::LengthMismatch {
            expected: data.m(),
            found: x.len(),
        });
    }
    let selected = x.indices();
    let per_class = (0..data.k())
        .map(|k| {
            let mut acc = BitSet::new(data.class_size(k));
            for &j in &selected {
                acc.union_with(data.column(k, j));
            }
            acc.count_ones()
        })
        .collect();
    Ok(CoverageCounts::from_per_class(per_class))
}

/// `(P(x | C_k), P(x | not C_k))` as exact rationals.
pub fn conditional_probability(
    cc: &CoverageCounts,
    data: &Dataset,
    k: usize,
) -> Result<(Ratio, Ratio)> {
    data.check_class(k)?;
    if cc.k() != data.k() {
        return Err(Error::LengthMismatch {
            expected: data.k(),
            found: cc.k(),
        });
    }
    let size = data.class_size(k);
    let rest = data.n() - size;
    if rest == 0 {
        return Err(Error::ClassIsPopulation(k));
    }
    let inside = cc.per_class[k];
    Ok((
        Ratio::new(inside as i64, size as i64),
        Ratio::new((cc.population - inside) as i64, rest as i64),
    ))
}

/// `P(x) = N_x / n`.
pub fn population_probability(cc: &CoverageCounts, data: &Dataset) -> Ratio {
    Ratio::new(cc.population as i64, data.n() as i64)
}

//! Minimum Set Cover instances and their reduction to a two-class count
//! audit.
//!
//! Subset `S_j` becomes PSV `p_j`. The target class holds one instance per
//! subset with only its own PSV set; the other class holds one instance per
//! universe element with `p_j` set iff the element lies in `S_j`. With
//! absolute thresholds `alpha = r`, `beta = n` a selector is a witness iff
//! it picks at most `r` subsets that together cover the universe.

use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit_count::{CountFinding, CountThresholds};
use crate::bits::BitSet;
use crate::dataset::{Dataset, PsvSchema};
use crate::error::{Error, Result};

/// Universe `{1, .., n}`, subsets of it, and a cover-size bound `r < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MscInstance {
    universe: usize,
    subsets: Vec<Vec<usize>>,
    r: usize,
}

impl MscInstance {
    /// Elements are one-based; each subset is stored sorted and deduplicated.
    pub fn new(universe: usize, subsets: Vec<Vec<usize>>, r: usize) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidMsc("universe must be non-empty".into()));
        }
        if subsets.is_empty() {
            return Err(Error::InvalidMsc("at least one subset required".into()));
        }
        if r == 0 || r >= universe {
            return Err(Error::InvalidMsc(format!(
                "need 1 ≤ r < n, got r = {r}, n = {universe}"
            )));
        }
        let mut clean = Vec::with_capacity(subsets.len());
        for (j, mut s) in subsets.into_iter().enumerate() {
            if let Some(&bad) = s.iter().find(|&&e| e == 0 || e > universe) {
                return Err(Error::InvalidMsc(format!(
                    "subset {} holds {bad}, outside 1..={universe}",
                    j + 1
                )));
            }
            s.sort_unstable();
            s.dedup();
            clean.push(s);
        }
        Ok(MscInstance {
            universe,
            subsets: clean,
            r,
        })
    }

    /// Parse `n m r` followed by `m` lines of space-separated elements.
    /// Blank subset lines denote empty subsets; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim());
        let header = lines
            .by_ref()
            .find(|l| !l.is_empty())
            .ok_or_else(|| Error::InvalidMsc("missing header line \"n m r\"".into()))?;
        let nums = parse_numbers(header)?;
        let [n, m, r] = nums[..] else {
            return Err(Error::InvalidMsc(format!(
                "header must be \"n m r\", got {header:?}"
            )));
        };
        let subsets: Vec<Vec<usize>> = lines.take(m).map(parse_numbers).collect::<Result<_>>()?;
        if subsets.len() != m {
            return Err(Error::InvalidMsc(format!(
                "expected {m} subset lines, found {}",
                subsets.len()
            )));
        }
        MscInstance::new(n, subsets, r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MscInstance::parse(&text)
    }

    /// Text accepted by [`MscInstance::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.universe, self.subsets.len(), self.r);
        for s in &self.subsets {
            out.push_str(&s.iter().join(" "));
            out.push('\n');
        }
        out
    }

    /// Random instance with `n` elements, `m` subsets and bound `r`, each
    /// element joining each subset with probability 1/2.
    pub fn random(n: usize, m: usize, r: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let subsets = (0..m)
            .map(|_| (1..=n).filter(|_| rng.random_bool(0.5)).collect())
            .collect();
        MscInstance::new(n, subsets, r)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Whether the zero-based subset indices cover the universe.
    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut hit = vec![false; self.universe];
        for &j in chosen {
            for &e in &self.subsets[j] {
                hit[e - 1] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    /// Smallest cover by exhaustive enumeration (first in lexicographic
    /// order among the smallest), if any.
    pub fn brute_force_cover(&self) -> Option<Vec<usize>> {
        (1..=self.subsets.len())
            .flat_map(|size| (0..self.subsets.len()).combinations(size))
            .find(|c| self.is_cover(c))
    }
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::InvalidMsc(format!("not a non-negative integer: {t:?}")))
        })
        .collect()
}

/// Count audit instance produced by [`reduce_msc_to_udsc`].
#[derive(Debug, Clone)]
pub struct ReducedUdsc {
    pub data: Dataset,
    /// Index of the class built from the subsets.
    pub target: usize,
    pub thresholds: CountThresholds,
}

pub fn reduce_msc_to_udsc(inst: &MscInstance) -> Result<ReducedUdsc> {
    let m = inst.subsets.len();
    let names: Vec<String> = (1..=m).map(|j| format!("S{j}")).collect();
    let schema = PsvSchema::binary(&names)?;
    let mut rows = Vec::with_capacity(m + inst.universe);
    let mut class_of = Vec::with_capacity(m + inst.universe);
    for j in 0..m {
        rows.push(BitSet::from_indices(m, &[j]).expect("j < m"));
        class_of.push(0);
    }
    for e in 1..=inst.universe {
        let members: Vec<usize> = (0..m).filter(|&j| inst.subsets[j].contains(&e)).collect();
        rows.push(BitSet::from_indices(m, &members).expect("j < m"));
        class_of.push(1);
    }
    let data = Dataset::new(schema, rows, class_of, vec!["T".into(), "O".into()])?;
    Ok(ReducedUdsc {
        data,
        target: 0,
        thresholds: CountThresholds::absolute(inst.r as u64, inst.universe as u64)?,
    })
}

/// Zero-based indices of the subsets picked by a finding on the reduced
/// instance. Fails unless they cover the universe with at most `r` sets.
pub fn extract_cover(finding: &CountFinding, inst: &MscInstance) -> Result<Vec<usize>> {
    if finding.selector.len() != inst.subsets.len() {
        return Err(Error::LengthMismatch {
            expected: inst.subsets.len(),
            found: finding.selector.len(),
        });
    }
    let chosen = finding.selector.indices();
    if chosen.len() > inst.r {
        return Err(Error::NotACover(format!(
            "{} subsets picked, bound is {}",
            chosen.len(),
            inst.r
        )));
    }
    if !inst.is_cover(&chosen) {
        return Err(Error::NotACover(format!(
            "subsets {:?} leave elements uncovered",
            chosen.iter().map(|j| j + 1).collect::<Vec<_>>()
        )));
    }
    Ok(chosen)
}

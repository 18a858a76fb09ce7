//! Synthetic populations drawn from per-class PSV marginals.
//!
//! PSVs are drawn independently within an instance, so any structure seen
//! in multi-PSV selectors of synthetic data comes from the marginals alone,
//! not from a joint distribution. PSVs listed in a group are drawn as one
//! categorical variable, so at most one of them is set per instance.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::dataset::{Dataset, PsvSchema};
use crate::error::{Error, Result};

/// Largest `m` accepted by [`random_fixture`].
pub const FIXTURE_MAX_PSVS: usize = 16;

/// Mutually exclusive PSVs drawn as one categorical variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub class_sizes: Vec<usize>,
    pub psv_names: Vec<String>,
    /// `fractions[k][j]`: probability that PSV `j` is set in class `k`.
    pub fractions: Vec<Vec<f64>>,
    /// Per-class utility hint, carried through unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSpec>,
}

impl MarginalSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: MarginalSpec =
            toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MarginalSpec::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn k(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn m(&self) -> usize {
        self.psv_names.len()
    }

    pub fn class_names(&self) -> Vec<String> {
        match &self.class_names {
            Some(names) => names.clone(),
            None => (0..self.k()).map(|k| format!("class{k}")).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.k() < 2 {
            return Err(Error::TooFewClasses(self.k()));
        }
        if let Some(k) = self.class_sizes.iter().position(|&s| s == 0) {
            return bad(format!("class {k} has size zero"));
        }
        if self.m() == 0 {
            return Err(Error::NoPsvs);
        }
        if self.fractions.len() != self.k() {
            return bad(format!(
                "{} fraction rows for {} classes",
                self.fractions.len(),
                self.k()
            ));
        }
        for (k, row) in self.fractions.iter().enumerate() {
            if row.len() != self.m() {
                return bad(format!(
                    "fraction row {k} has {} entries, expected {}",
                    row.len(),
                    self.m()
                ));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return bad(format!("fraction {p} in row {k} is outside [0, 1]"));
            }
        }
        if let Some(u) = &self.utilities {
            if u.len() != self.k() {
                return bad(format!("{} utilities for {} classes", u.len(), self.k()));
            }
        }
        if let Some(names) = &self.class_names {
            if names.len() != self.k() {
                return bad(format!(
                    "{} class names for {} classes",
                    names.len(),
                    self.k()
                ));
            }
        }
        let mut grouped = vec![false; self.m()];
        for g in &self.groups {
            for name in &g.members {
                let Some(j) = self.psv_names.iter().position(|p| p == name) else {
                    return bad(format!("group {} names unknown PSV {name}", g.name));
                };
                if grouped[j] {
                    return bad(format!("PSV {name} belongs to two groups"));
                }
                grouped[j] = true;
            }
        }
        for (k, row) in self.fractions.iter().enumerate() {
            for (g, members) in self.group_indices().iter().enumerate() {
                let total: f64 = members.iter().map(|&j| row[j]).sum();
                if total > 1.0 + 1e-9 {
                    return bad(format!(
                        "group {} fractions sum to {total} in class {k}",
                        self.groups[g].name
                    ));
                }
            }
        }
        Ok(())
    }

    fn group_indices(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| {
                g.members
                    .iter()
                    .filter_map(|n| self.psv_names.iter().position(|p| p == n))
                    .collect()
            })
            .collect()
    }
}

/// Draw a population from `spec`. Class `k` uses ChaCha8 seeded from `seed`
/// on stream `k`, so classes are generated independently and in parallel.
pub fn synth_population(spec: &MarginalSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let m = spec.m();
    let groups = spec.group_indices();
    let mut in_group = vec![false; m];
    groups.iter().flatten().for_each(|&j| in_group[j] = true);
    let per_class: Vec<Vec<BitSet>> = (0..spec.k())
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let row = &spec.fractions[k];
            (0..spec.class_sizes[k])
                .map(|_| {
                    let mut bits = BitSet::new(m);
                    for j in (0..m).filter(|&j| !in_group[j]) {
                        if rng.random_bool(row[j]) {
                            bits.insert(j);
                        }
                    }
                    for members in &groups {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        for &j in members {
                            acc += row[j];
                            if u < acc {
                                bits.insert(j);
                                break;
                            }
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.class_sizes.iter().sum());
    let mut class_of = Vec::with_capacity(rows.capacity());
    for (k, class_rows) in per_class.into_iter().enumerate() {
        class_of.extend(std::iter::repeat_n(k, class_rows.len()));
        rows.extend(class_rows);
    }
    let schema = PsvSchema::binary(&spec.psv_names)?;
    Dataset::new(schema, rows, class_of, spec.class_names())
}

/// Uniform random bits and uniform class labels, labels redrawn until every
/// class is non-empty. PSVs are named `p0, p1, ..` and classes `c0, c1, ..`.
pub fn random_fixture(m: usize, n: usize, k: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::NoPsvs);
    }
    if m > FIXTURE_MAX_PSVS {
        return Err(Error::TooManyPsvs {
            m,
            max: FIXTURE_MAX_PSVS,
        });
    }
    if k < 2 {
        return Err(Error::TooFewClasses(k));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!(
            "{n} instances cannot fill {k} classes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<BitSet> = (0..n)
        .map(|_| BitSet::from_bools((0..m).map(|_| rng.random_bool(0.5))))
        .collect();
    let labels = loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut seen = vec![false; k];
        labels.iter().for_each(|&c| seen[c] = true);
        if seen.into_iter().all(|s| s) {
            break labels;
        }
    };
    let names: Vec<String> = (0..m).map(|j| format!("p{j}")).collect();
    let class_names = (0..k).map(|c| format!("c{c}")).collect();
    Dataset::new(PsvSchema::binary(&names)?, rows, labels, class_names)
}

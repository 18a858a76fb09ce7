//! Populations partitioned into classes, described by binary PSVs.

mod csv_io;

pub use csv_io::{load_csv, read_csv, write_csv, MISSING_VALUE};

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// Where a PSV comes from in the raw data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsvOrigin {
    /// Raw attribute (column) name.
    pub attribute: String,
    /// Raw value this PSV encodes; `None` for an already-binary column.
    pub value: Option<String>,
}

impl PsvOrigin {
    pub fn binary(attribute: impl Into<String>) -> Self {
        PsvOrigin {
            attribute: attribute.into(),
            value: None,
        }
    }

    pub fn one_hot(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        PsvOrigin {
            attribute: attribute.into(),
            value: Some(value.into()),
        }
    }
}

/// Names and provenance of the `m` PSVs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsvSchema {
    names: Vec<String>,
    origins: Vec<PsvOrigin>,
    /// One-hot group id per PSV, `None` for binary columns.
    groups: Vec<Option<usize>>,
}

impl PsvSchema {
    pub fn new(names: Vec<String>, origins: Vec<PsvOrigin>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::NoPsvs);
        }
        if names.len() != origins.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                found: origins.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidParameter(
                    "PSV names must be non-empty".into(),
                ));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicatePsv(name.clone()));
            }
        }
        let mut group_ids: Vec<&str> = Vec::new();
        let groups = origins
            .iter()
            .map(|o| {
                o.value
                    .as_ref()
                    .map(|_| match group_ids.iter().position(|g| *g == o.attribute) {
                        Some(i) => i,
                        None => {
                            group_ids.push(&o.attribute);
                            group_ids.len() - 1
                        }
                    })
            })
            .collect();
        Ok(PsvSchema {
            names,
            origins,
            groups,
        })
    }

    /// Schema of independent binary PSVs named `names`.
    pub fn binary<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let origins = names.iter().map(PsvOrigin::binary).collect();
        PsvSchema::new(names, origins)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn origins(&self) -> &[PsvOrigin] {
        &self.origins
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// One-hot group of PSV `j`, if it came from a categorical attribute.
    pub fn group_of(&self, j: usize) -> Option<usize> {
        self.groups[j]
    }

    pub(crate) fn group_ids(&self) -> &[Option<usize>] {
        &self.groups
    }

    /// PSV indices of each one-hot group, in group order.
    pub fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        let count = self.groups.iter().flatten().max().map_or(0, |g| g + 1);
        let mut out = vec![Vec::new(); count];
        for (j, g) in self.groups.iter().enumerate() {
            if let Some(g) = g {
                out[*g].push(j);
            }
        }
        out
    }
}

/// An immutable population: `n` instances over `m` PSVs, partitioned into
/// `K >= 2` non-empty classes.
///
/// A per-class column index (one bitset per PSV over the class's members) is
/// built at construction; coverage of a disjunction is the popcount of the OR
/// of its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: PsvSchema,
    rows: Vec<BitSet>,
    class_of: Vec<usize>,
    class_names: Vec<String>,
    class_sizes: Vec<usize>,
    ids: Option<Vec<String>>,
    members: Vec<Vec<usize>>,
    columns: Vec<Vec<BitSet>>,
}

impl Dataset {
    pub fn new(
        schema: PsvSchema,
        rows: Vec<BitSet>,
        class_of: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let m = schema.len();
        let k = class_names.len();
        if rows.len() != class_of.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: class_of.len(),
            });
        }
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        let mut class_sizes = vec![0usize; k];
        let mut members = vec![Vec::new(); k];
        for (i, (row, &c)) in rows.iter().zip(&class_of).enumerate() {
            if row.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            if c >= k {
                return Err(Error::ClassOutOfRange { index: c, k });
            }
            class_sizes[c] += 1;
            members[c].push(i);
        }
        if let Some(empty) = class_sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyClass(class_names[empty].clone()));
        }
        for group in schema.one_hot_groups() {
            if let Some(row) = rows
                .iter()
                .position(|r| group.iter().filter(|&&j| r.get(j)).count() > 1)
            {
                return Err(Error::InvalidParameter(format!(
                    "row {row} sets more than one PSV of one-hot attribute `{}`",
                    schema.origins()[group[0]].attribute
                )));
            }
        }
        let columns = members
            .iter()
            .map(|rows_in_class| {
                let mut cols = vec![BitSet::new(rows_in_class.len()); m];
                for (pos, &i) in rows_in_class.iter().enumerate() {
                    for j in rows[i].iter_ones() {
                        cols[j].insert(pos);
                    }
                }
                cols
            })
            .collect();
        Ok(Dataset {
            schema,
            rows,
            class_of,
            class_names,
            class_sizes,
            ids: None,
            members,
            columns,
        })
    }

    /// Build from 0/1 rows, mostly for fixtures and tests.
    pub fn from_rows<S: AsRef<str>, C: AsRef<str>>(
        psv_names: &[S],
        class_names: &[C],
        rows: &[(&[u8], usize)],
    ) -> Result<Self> {
        let schema = PsvSchema::binary(psv_names)?;
        let bits = rows
            .iter()
            .map(|(r, _)| BitSet::from_bools(r.iter().map(|&b| b != 0)))
            .collect();
        let class_of = rows.iter().map(|&(_, c)| c).collect();
        let names = class_names.iter().map(|c| c.as_ref().to_string()).collect();
        Dataset::new(schema, bits, class_of, names)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                expected: self.rows.len(),
                found: ids.len(),
            });
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn schema(&self) -> &PsvSchema {
        &self.schema
    }

    /// Number of instances.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of PSVs.
    pub fn m(&self) -> usize {
        self.schema.len()
    }

    /// Number of classes.
    pub fn k(&self) -> usize {
        self.class_names.len()
    }

    pub fn rows(&self) -> &[BitSet] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitSet {
        &self.rows[i]
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn class_size(&self, k: usize) -> usize {
        self.class_sizes[k]
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Row indices of class `k`, in row order.
    pub fn members(&self, k: usize) -> Result<&[usize]> {
        self.check_class(k)?;
        Ok(&self.members[k])
    }

    /// The instances of class `k`, in stable row order.
    pub fn class_view(&self, k: usize) -> Result<Vec<&BitSet>> {
        Ok(self.members(k)?.iter().map(|&i| &self.rows[i]).collect())
    }

    /// Bitset over the members of class `k` marking which have PSV `j` set.
    pub fn column(&self, k: usize, j: usize) -> &BitSet {
        &self.columns[k][j]
    }

    pub(crate) fn check_class(&self, k: usize) -> Result<()> {
        if k >= self.k() {
            Err(Error::ClassOutOfRange {
                index: k,
                k: self.k(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fixtures;

    #[test]
    fn d1_class_views() {
        let d = fixtures::d1();
        let t = d.class_view(0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0], &BitSet::from_bools([true, false, false]));
        assert_eq!(t[1], &BitSet::from_bools([true, false, true]));
        assert_eq!(d.class_view(1).unwrap().len(), 4);
        assert!(matches!(
            d.class_view(5),
            Err(Error::ClassOutOfRange { index: 5, k: 2 })
        ));
    }

    #[test]
    fn class_views_partition_rows() {
        let d = crate::synth::random_fixture(5, 40, 3, 11).unwrap();
        let mut all: Vec<usize> = (0..d.k())
            .flat_map(|k| d.members(k).unwrap().to_vec())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..d.n()).collect::<Vec<_>>());
        assert_eq!(d.class_sizes().iter().sum::<usize>(), d.n());
        let views: usize = (0..d.k()).map(|k| d.class_view(k).unwrap().len()).sum();
        assert_eq!(views, d.n());
    }

    #[test]
    fn rejects_single_class_and_empty_class() {
        let one = Dataset::from_rows(&["a"], &["only"], &[(&[1], 0), (&[0], 0)]);
        assert!(matches!(one, Err(Error::TooFewClasses(1))));
        let empty = Dataset::from_rows(&["a"], &["x", "y"], &[(&[1], 0)]);
        assert!(matches!(empty, Err(Error::EmptyClass(ref c)) if c == "y"));
    }

    #[test]
    fn rejects_ragged_rows() {
        let r = Dataset::from_rows(&["a", "b"], &["x", "y"], &[(&[1], 0), (&[0, 1], 1)]);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn schema_rejects_duplicates_and_empty() {
        assert!(matches!(
            PsvSchema::binary(&["a", "a"]),
            Err(Error::DuplicatePsv(_))
        ));
        assert!(matches!(PsvSchema::binary::<&str>(&[]), Err(Error::NoPsvs)));
    }

    #[test]
    fn one_hot_groups_follow_attributes() {
        let schema = PsvSchema::new(
            vec!["g=M".into(), "married".into(), "g=F".into()],
            vec![
                PsvOrigin::one_hot("g", "M"),
                PsvOrigin::binary("married"),
                PsvOrigin::one_hot("g", "F"),
            ],
        )
        .unwrap();
        assert_eq!(schema.one_hot_groups(), vec![vec![0, 2]]);
        assert_eq!(schema.group_of(1), None);
    }

    #[test]
    fn columns_index_class_members() {
        let d = fixtures::d1();
        // class 1 rows: (0,1,0) (0,1,1) (1,1,0) (0,0,1)
        assert_eq!(
            d.column(1, 1).iter_ones().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(d.column(1, 2).iter_ones().collect::<Vec<_>>(), vec![1, 3]);
    }
}

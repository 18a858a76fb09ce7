//! Small hand-checked populations shared by tests, benches and the CLI.

use crate::coverage::Selector;
use crate::dataset::Dataset;

use super::msc::MscInstance;

/// Three PSVs `Female, LowIncome, Married`; class `T` (2 rows) and class
/// `O` (4 rows). At `alpha = 1/5`, `beta = 1/2` the shortest count witness is
/// `LowIncome` against `T`.
pub fn d1() -> Dataset {
    let rows: Vec<(&[u8], usize)> = vec![
        (&[1, 0, 0], 0),
        (&[1, 0, 1], 0),
        (&[0, 1, 0], 1),
        (&[0, 1, 1], 1),
        (&[1, 1, 0], 1),
        (&[0, 0, 1], 1),
    ];
    Dataset::from_rows(&["Female", "LowIncome", "Married"], &["T", "O"], &rows)
        .expect("fixture is valid")
}

/// 32 instances, one PSV `x`: class `C1` has 24 rows (6 covered) and class
/// `C2` has 8 rows (2 covered), so both conditional probabilities are 1/4.
pub fn d2() -> Dataset {
    let mut rows: Vec<(&[u8], usize)> = Vec::with_capacity(32);
    rows.extend(std::iter::repeat_n((&[1u8][..], 0), 6));
    rows.extend(std::iter::repeat_n((&[0u8][..], 0), 18));
    rows.extend(std::iter::repeat_n((&[1u8][..], 1), 2));
    rows.extend(std::iter::repeat_n((&[0u8][..], 1), 6));
    Dataset::from_rows(&["x"], &["C1", "C2"], &rows).expect("fixture is valid")
}

/// The single PSV of [`d2`].
pub fn d2_selector() -> Selector {
    Selector::from_bits(&[1])
}

/// `U = {1, 2, 3}`, `S1 = {1, 2}`, `S2 = {2, 3}`, `S3 = {3}`, `r = 2`, with
/// its lexicographically first minimum cover `{S1, S2}` as zero-based
/// subset indices.
pub fn r1() -> (MscInstance, Vec<usize>) {
    let inst =
        MscInstance::new(3, vec![vec![1, 2], vec![2, 3], vec![3]], 2).expect("fixture is valid");
    (inst, vec![0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_shapes() {
        let d1 = d1();
        assert_eq!((d1.n(), d1.m(), d1.k()), (6, 3, 2));
        assert_eq!(d1.class_sizes(), &[2, 4]);
        let d2 = d2();
        assert_eq!((d2.n(), d2.m(), d2.k()), (32, 1, 2));
        assert_eq!(d2.class_sizes(), &[24, 8]);
        let (r1, cover) = r1();
        assert_eq!(r1.subsets().len(), 3);
        assert_eq!(cover, vec![0, 1]);
    }
}

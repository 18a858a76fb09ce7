//! Fixed-length bit vectors backed by `u64` words.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut set = BitSet::new(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                set.insert(i);
            }
        }
        set
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Option<Self> {
        let mut set = BitSet::new(len);
        for &i in indices {
            if i >= len {
                return None;
            }
            set.insert(i);
        }
        Some(set)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits in `self | other` without materializing the union.
    #[inline]
    pub fn union_count(&self, other: &BitSet) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Overwrite `self` with `a | b`, reusing the allocation.
    #[inline]
    pub fn set_union_of(&mut self, a: &BitSet, b: &BitSet) {
        debug_assert_eq!(a.len, b.len);
        self.len = a.len;
        self.words.clear();
        self.words
            .extend(a.words.iter().zip(&b.words).map(|(x, y)| x | y));
    }

    #[inline]
    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BitSet(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_get_remove() {
        let mut s = BitSet::new(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert!(s.get(64) && s.get(129) && !s.get(1));
        assert_eq!(s.count_ones(), 3);
        s.remove(64);
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![0, 129]);
    }

    #[test]
    fn from_indices_rejects_out_of_range() {
        assert!(BitSet::from_indices(3, &[3]).is_none());
        assert_eq!(
            BitSet::from_indices(3, &[2, 0]).unwrap(),
            BitSet::from_bools([true, false, true])
        );
    }

    proptest! {
        #[test]
        fn union_count_matches_materialized_union(
            a in proptest::collection::vec(any::<bool>(), 0..200),
            seed in any::<u64>(),
        ) {
            let b: Vec<bool> = a.iter().enumerate()
                .map(|(i, _)| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1)
                .collect();
            let sa = BitSet::from_bools(a.iter().copied());
            let sb = BitSet::from_bools(b.iter().copied());
            let mut u = sa.clone();
            u.union_with(&sb);
            let expect = a.iter().zip(&b).filter(|(x, y)| **x || **y).count();
            prop_assert_eq!(u.count_ones(), expect);
            prop_assert_eq!(sa.union_count(&sb), expect);
            prop_assert_eq!(sa.intersects(&sb), a.iter().zip(&b).any(|(x, y)| *x && *y));
        }
    }
}

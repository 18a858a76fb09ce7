//! Depth-first enumeration of selectors shared by all audits.
//!
//! Selectors of a fixed cardinality are visited in increasing lexicographic
//! order of their index lists, which is the tie-break order of every search.
//! Each audit supplies a [`Criterion`]: a leaf test on per-class counts and a
//! prune test fed with the current counts and an optimistic count (the
//! coverage of the current selector OR'd with every PSV still available).

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::coverage::Selector;
use crate::dataset::Dataset;

/// How previously reported selectors constrain later searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionMode {
    /// New selectors must share no PSV with any excluded selector.
    #[default]
    Disjoint,
    /// New selectors must merely differ from every excluded selector.
    NotEqual,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Exclusions {
    pub mode: ExclusionMode,
    pub selectors: Vec<Selector>,
}

impl Exclusions {
    pub fn none() -> Self {
        Exclusions::default()
    }

    pub fn new(mode: ExclusionMode, selectors: Vec<Selector>) -> Self {
        Exclusions { mode, selectors }
    }

    pub fn push(&mut self, x: Selector) {
        self.selectors.push(x);
    }

    pub fn permits(&self, x: &Selector) -> bool {
        match self.mode {
            ExclusionMode::Disjoint => self.selectors.iter().all(|e| e.is_disjoint(x)),
            ExclusionMode::NotEqual => self.selectors.iter().all(|e| e != x),
        }
    }

    /// PSVs that may appear in a selector at all.
    pub fn allowed_psvs(&self, m: usize) -> Vec<usize> {
        match self.mode {
            ExclusionMode::Disjoint => (0..m)
                .filter(|&j| self.selectors.iter().all(|e| !e.contains(j)))
                .collect(),
            ExclusionMode::NotEqual => (0..m).collect(),
        }
    }

    fn forbidden_exact(&self) -> &[Selector] {
        match self.mode {
            ExclusionMode::Disjoint => &[],
            ExclusionMode::NotEqual => &self.selectors,
        }
    }
}

pub(crate) trait Criterion {
    /// True when no extension of the current selector can be accepted.
    fn prune(&self, _current: &[usize], _optimistic: &[usize]) -> bool {
        false
    }

    fn accept(&self, counts: &[usize], chosen: &[usize]) -> bool;
}

pub(crate) struct SearchSpace<'a> {
    data: &'a Dataset,
    allowed: Vec<usize>,
    /// `suffix[p][k]`: OR of the class-`k` columns of `allowed[p..]`.
    suffix: Vec<Vec<BitSet>>,
    forbidden: Vec<Selector>,
    groups: Option<&'a [Option<usize>]>,
}

impl<'a> SearchSpace<'a> {
    pub fn new(
        data: &'a Dataset,
        exclusions: &Exclusions,
        blocked: Option<&[usize]>,
        forbid_same_attribute: bool,
    ) -> Self {
        let mut allowed = exclusions.allowed_psvs(data.m());
        if let Some(blocked) = blocked {
            allowed.retain(|j| !blocked.contains(j));
        }
        let k = data.k();
        let mut suffix = vec![Vec::new(); allowed.len() + 1];
        suffix[allowed.len()] = (0..k).map(|c| BitSet::new(data.class_size(c))).collect();
        for p in (0..allowed.len()).rev() {
            let next = &suffix[p + 1];
            suffix[p] = (0..k)
                .map(|c| {
                    let mut s = next[c].clone();
                    s.union_with(data.column(c, allowed[p]));
                    s
                })
                .collect();
        }
        SearchSpace {
            data,
            allowed,
            suffix,
            forbidden: exclusions.forbidden_exact().to_vec(),
            groups: forbid_same_attribute.then(|| data.schema().group_ids()),
        }
    }

    pub fn allowed(&self) -> &[usize] {
        &self.allowed
    }

    /// First selector of exactly `size` PSVs (lexicographic order) accepted
    /// by `criterion`, with its per-class counts.
    pub fn first_of_size<C: Criterion>(
        &self,
        size: usize,
        criterion: &C,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        if size == 0 || size > self.allowed.len() {
            return None;
        }
        let mut walk = Walk::new(self, size);
        let mut found = None;
        walk.descend(0, 0, &mut |chosen, counts, optimistic, complete| {
            if complete {
                if criterion.accept(counts, chosen) && self.not_forbidden(chosen) {
                    found = Some((chosen.to_vec(), counts.to_vec()));
                    return Step::Stop;
                }
                Step::Skip
            } else if criterion.prune(counts, optimistic) {
                Step::Skip
            } else {
                Step::Continue
            }
        });
        found
    }

    /// Visit every non-empty selector with at most `max_size` PSVs in
    /// preorder (lexicographic order of index lists).
    pub fn preorder<T>(
        &self,
        max_size: usize,
        mut visit: impl FnMut(&[usize], &[usize]) -> ControlFlow<T>,
    ) -> Option<T> {
        let max_size = max_size.min(self.allowed.len());
        if max_size == 0 {
            return None;
        }
        let mut walk = Walk::new(self, max_size);
        let mut result = None;
        walk.descend_preorder(0, 0, &mut |chosen, counts| {
            if !self.not_forbidden(chosen) {
                return true;
            }
            match visit(chosen, counts) {
                ControlFlow::Continue(()) => true,
                ControlFlow::Break(t) => {
                    result = Some(t);
                    false
                }
            }
        });
        result
    }

    fn not_forbidden(&self, chosen: &[usize]) -> bool {
        self.forbidden
            .iter()
            .all(|f| f.cardinality() != chosen.len() || !chosen.iter().all(|&j| f.contains(j)))
    }
}

enum Step {
    Continue,
    Skip,
    Stop,
}

struct Walk<'s, 'a> {
    space: &'s SearchSpace<'a>,
    size: usize,
    chosen: Vec<usize>,
    /// `acc[d][k]`: class-`k` coverage of the first `d` chosen PSVs.
    acc: Vec<Vec<BitSet>>,
    counts: Vec<usize>,
    optimistic: Vec<usize>,
    used_groups: Vec<usize>,
}

impl<'s, 'a> Walk<'s, 'a> {
    fn new(space: &'s SearchSpace<'a>, size: usize) -> Self {
        let k = space.data.k();
        let empty: Vec<BitSet> = (0..k)
            .map(|c| BitSet::new(space.data.class_size(c)))
            .collect();
        Walk {
            space,
            size,
            chosen: Vec::with_capacity(size),
            acc: vec![empty; size + 1],
            counts: vec![0; k],
            optimistic: vec![0; k],
            used_groups: Vec::new(),
        }
    }

    fn fill_counts(&mut self, depth: usize, next: usize) {
        let acc = &self.acc[depth];
        let suffix = &self.space.suffix[next];
        for c in 0..acc.len() {
            self.counts[c] = acc[c].count_ones();
            self.optimistic[c] = acc[c].union_count(&suffix[c]);
        }
    }

    fn group_clash(&self, j: usize) -> Option<Option<usize>> {
        let Some(groups) = self.space.groups else {
            return Some(None);
        };
        match groups[j] {
            Some(g) if self.used_groups.contains(&g) => None,
            g => Some(g),
        }
    }

    fn push(&mut self, depth: usize, j: usize, group: Option<usize>) {
        let (head, tail) = self.acc.split_at_mut(depth + 1);
        for (c, dst) in tail[0].iter_mut().enumerate() {
            dst.set_union_of(&head[depth][c], self.space.data.column(c, j));
        }
        self.chosen.push(j);
        if let Some(g) = group {
            self.used_groups.push(g);
        }
    }

    fn pop(&mut self, group: Option<usize>) {
        self.chosen.pop();
        if group.is_some() {
            self.used_groups.pop();
        }
    }

    /// Exact-size walk. Returns false once the visitor stops the search.
    fn descend(
        &mut self,
        depth: usize,
        next: usize,
        visit: &mut impl FnMut(&[usize], &[usize], &[usize], bool) -> Step,
    ) -> bool {
        self.fill_counts(depth, next);
        let complete = depth == self.size;
        match visit(&self.chosen, &self.counts, &self.optimistic, complete) {
            Step::Stop => return false,
            Step::Skip => return true,
            Step::Continue if complete => return true,
            Step::Continue => {}
        }
        let allowed = &self.space.allowed;
        let remaining = self.size - depth;
        for p in next..allowed.len() {
            if allowed.len() - p < remaining {
                break;
            }
            let j = allowed[p];
            let Some(group) = self.group_clash(j) else {
                continue;
            };
            self.push(depth, j, group);
            let go_on = self.descend(depth + 1, p + 1, visit);
            self.pop(group);
            if !go_on {
                return false;
            }
        }
        true
    }

    fn descend_preorder(
        &mut self,
        depth: usize,
        next: usize,
        visit: &mut impl FnMut(&[usize], &[usize]) -> bool,
    ) -> bool {
        if depth == self.size {
            return true;
        }
        let allowed = &self.space.allowed;
        for (p, &j) in allowed.iter().enumerate().skip(next) {
            let Some(group) = self.group_clash(j) else {
                continue;
            };
            self.push(depth, j, group);
            self.fill_counts(depth + 1, p + 1);
            let go_on =
                visit(&self.chosen, &self.counts) && self.descend_preorder(depth + 1, p + 1, visit);
            self.pop(group);
            if !go_on {
                return false;
            }
        }
        true
    }
}

use std::collections::BTreeMap;

use super::{DegreeStatistic, PlaneTree};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Distinct permutations of a multiset, in lexicographic order.
///
/// With `prune_preorder` set, only sequences whose proper prefixes satisfy
/// `d(1) + ... + d(j) >= j` are produced, which for a balanced multiset are
/// exactly the preorder degree sequences of plane trees.
#[derive(Clone, Debug)]
pub struct MultisetPermutations {
    values: Vec<u32>,
    remaining: Vec<u64>,
    stack: Vec<usize>,
    sum: u64,
    len: usize,
    next_choice: usize,
    prune_preorder: bool,
    done: bool,
}

impl MultisetPermutations {
    pub fn new(items: &[u32], prune_preorder: bool) -> Self {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for &x in items {
            *counts.entry(x).or_insert(0) += 1;
        }
        MultisetPermutations {
            values: counts.keys().copied().collect(),
            remaining: counts.values().copied().collect(),
            stack: Vec::with_capacity(items.len()),
            sum: 0,
            len: items.len(),
            next_choice: 0,
            prune_preorder,
            done: items.is_empty(),
        }
    }

    fn admissible(&self, c: usize) -> bool {
        if self.remaining[c] == 0 {
            return false;
        }
        if !self.prune_preorder {
            return true;
        }
        let depth = self.stack.len() + 1;
        depth == self.len || self.sum + self.values[c] as u64 >= depth as u64
    }

    fn pop(&mut self) -> Option<usize> {
        let c = self.stack.pop()?;
        self.remaining[c] += 1;
        self.sum -= self.values[c] as u64;
        Some(c)
    }
}

impl Iterator for MultisetPermutations {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        while !self.done {
            if self.stack.len() == self.len {
                let out = self.stack.iter().map(|&c| self.values[c]).collect();
                let c = self.pop().expect("non-empty");
                self.next_choice = c + 1;
                return Some(out);
            }
            match (self.next_choice..self.values.len()).find(|&c| self.admissible(c)) {
                Some(c) => {
                    self.stack.push(c);
                    self.remaining[c] -= 1;
                    self.sum += self.values[c] as u64;
                    self.next_choice = 0;
                }
                None => match self.pop() {
                    Some(c) => self.next_choice = c + 1,
                    None => self.done = true,
                },
            }
        }
        None
    }
}

/// Every plane tree with degree statistic `stat`, each exactly once.
pub fn enumerate_trees(stat: &DegreeStatistic) -> Result<impl Iterator<Item = PlaneTree>> {
    enumerate_trees_capped(stat, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_capped(
    stat: &DegreeStatistic,
    cap: usize,
) -> Result<impl Iterator<Item = PlaneTree>> {
    let size = stat.size() as usize;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(MultisetPermutations::new(&stat.degree_multiset(), true)
        .map(PlaneTree::from_preorder_unchecked))
}

/// All degree statistics of trees with `k` vertices, i.e. partitions of
/// `k - 1` into the degrees of the internal vertices.
pub fn all_degree_statistics(k: u64) -> Vec<DegreeStatistic> {
    fn partitions(rest: u64, max_part: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 0 {
            out.push(acc.clone());
            return;
        }
        for part in (1..=rest.min(max_part)).rev() {
            acc.push(part);
            partitions(rest - part, part, acc, out);
            acc.pop();
        }
    }
    if k == 0 {
        return Vec::new();
    }
    let mut parts = Vec::new();
    partitions(k - 1, k - 1, &mut Vec::new(), &mut parts);
    parts
        .into_iter()
        .map(|p| {
            let mut counts = BTreeMap::new();
            counts.insert(0u32, k - p.len() as u64);
            for d in p {
                *counts.entry(d as u32).or_insert(0) += 1;
            }
            DegreeStatistic::new(counts).expect("partition gives a balanced statistic")
        })
        .collect()
}

/// All plane trees with `k` vertices.
pub fn all_trees_of_size(k: u64) -> Result<Vec<PlaneTree>> {
    let mut out = Vec::new();
    for stat in all_degree_statistics(k) {
        out.extend(enumerate_trees_capped(&stat, usize::MAX)?);
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stat(pairs: &[(u32, u64)]) -> DegreeStatistic {
        DegreeStatistic::from_pairs(pairs).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let trees: Vec<_> = enumerate_trees(&stat(&[(0, 3), (2, 2)])).unwrap().collect();
        let text: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
        assert_eq!(text, vec!["2,0,2,0,0", "2,2,0,0,0"]);
        let leaf: Vec<_> = enumerate_trees(&stat(&[(0, 1)])).unwrap().collect();
        assert_eq!(leaf, vec![PlaneTree::leaf()]);
        let cherry: Vec<_> = enumerate_trees(&stat(&[(0, 2), (2, 1)])).unwrap().collect();
        assert_eq!(cherry, vec![PlaneTree::cherry()]);
    }

    #[test]
    fn cap_is_enforced() {
        let big = stat(&[(0, 7), (2, 6)]);
        assert!(matches!(enumerate_trees(&big), Err(Error::CapExceeded { size: 13, cap: 12 })));
    }

    #[test]
    fn multiset_permutation_counts() {
        assert_eq!(MultisetPermutations::new(&[0, 0, 1, 1, 2], false).count(), 30);
        assert_eq!(MultisetPermutations::new(&[3], false).count(), 1);
        assert_eq!(MultisetPermutations::new(&[], false).count(), 0);
    }

    #[test]
    fn catalan_numbers() {
        let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
        for (k, &c) in catalan.iter().enumerate() {
            assert_eq!(all_trees_of_size(k as u64 + 1).unwrap().len(), c);
        }
    }

    #[test]
    fn statistics_of_size_five() {
        // partitions of 4: 4, 3+1, 2+2, 2+1+1, 1+1+1+1
        assert_eq!(all_degree_statistics(5).len(), 5);
    }
}

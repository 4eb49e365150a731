//! Plane trees stored as preorder degree sequences, degree statistics and
//! fringe-subtree counting.

mod enumerate;
mod path;
mod unordered;

pub use enumerate::{
    all_degree_statistics, all_trees_of_size, enumerate_trees, enumerate_trees_capped,
    MultisetPermutations, DEFAULT_ENUMERATION_CAP,
};
pub use path::{bridge_from_degrees, vervaat, vervaat_degrees, LukasiewiczPath, PathKind};
pub use unordered::{canonical_unordered, enumerate_orderings, UnorderedKey};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::factorial;

/// A rooted ordered tree, encoded by the outdegrees of its vertices in
/// preorder.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaneTree {
    degrees: Vec<u32>,
}

impl PlaneTree {
    /// Validates a preorder degree sequence.
    ///
    /// The first offending index is reported: either the first prefix whose
    /// degree sum falls below its length, or the last index when the total is
    /// wrong.
    pub fn from_preorder(degrees: Vec<u32>) -> Result<Self> {
        let k = degrees.len();
        if k == 0 {
            return Err(Error::InvalidPreorder { index: 0 });
        }
        let mut sum: u64 = 0;
        for (j, &d) in degrees.iter().enumerate() {
            sum += d as u64;
            let len = j as u64 + 1;
            if j + 1 < k && sum < len {
                return Err(Error::InvalidPreorder { index: j });
            }
        }
        if sum != k as u64 - 1 {
            return Err(Error::InvalidPreorder { index: k - 1 });
        }
        Ok(PlaneTree { degrees })
    }

    /// Skips validation. Callers must guarantee a valid sequence.
    pub(crate) fn from_preorder_unchecked(degrees: Vec<u32>) -> Self {
        debug_assert!(PlaneTree::from_preorder(degrees.clone()).is_ok());
        PlaneTree { degrees }
    }

    pub fn leaf() -> Self {
        PlaneTree { degrees: vec![0] }
    }

    /// Root with `d` leaf children.
    pub fn star(d: u32) -> Self {
        let mut degrees = vec![d];
        degrees.extend(std::iter::repeat_n(0, d as usize));
        PlaneTree { degrees }
    }

    /// The binary star `(2,0,0)`.
    pub fn cherry() -> Self {
        PlaneTree::star(2)
    }

    /// Path with `k >= 1` vertices.
    pub fn path(k: usize) -> Self {
        assert!(k >= 1, "a path has at least one vertex");
        let mut degrees = vec![1; k - 1];
        degrees.push(0);
        PlaneTree { degrees }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn into_degrees(self) -> Vec<u32> {
        self.degrees
    }

    pub fn size(&self) -> usize {
        self.degrees.len()
    }

    pub fn root_degree(&self) -> u32 {
        self.degrees[0]
    }

    pub fn degree_statistic(&self) -> DegreeStatistic {
        let mut counts = BTreeMap::new();
        for &d in &self.degrees {
            *counts.entry(d).or_insert(0u64) += 1;
        }
        DegreeStatistic { counts }
    }

    /// Number of vertices in each fringe subtree, indexed by preorder position.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let k = self.degrees.len();
        let mut sizes = vec![0; k];
        let mut stack: Vec<usize> = Vec::new();
        for i in (0..k).rev() {
            let mut s = 1;
            for _ in 0..self.degrees[i] {
                s += stack.pop().expect("valid preorder sequence");
            }
            sizes[i] = s;
            stack.push(s);
        }
        sizes
    }

    /// Fringe subtree rooted at preorder position `v`.
    pub fn fringe_at(&self, v: usize) -> PlaneTree {
        let size = self.subtree_sizes()[v];
        PlaneTree { degrees: self.degrees[v..v + size].to_vec() }
    }

    /// Children of each vertex as preorder positions.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let sizes = self.subtree_sizes();
        (0..self.size())
            .map(|v| {
                let mut out = Vec::with_capacity(self.degrees[v] as usize);
                let mut c = v + 1;
                for _ in 0..self.degrees[v] {
                    out.push(c);
                    c += sizes[c];
                }
                out
            })
            .collect()
    }

    /// `N_{pattern}(self)`: number of vertices whose fringe subtree equals
    /// `pattern`.
    ///
    /// A contiguous block of the preorder sequence that is itself a valid
    /// preorder sequence is exactly the fringe subtree at its first position,
    /// so plain block matching suffices. For very long patterns a suffix
    /// automaton would be the upgrade.
    pub fn count_fringe(&self, pattern: &PlaneTree) -> u64 {
        let m = pattern.size();
        if m > self.size() {
            return 0;
        }
        if m == 1 {
            return self.degrees.iter().filter(|&&d| d == 0).count() as u64;
        }
        let p = pattern.degrees();
        self.degrees.windows(m).filter(|w| *w == p).count() as u64
    }

    /// Empirical law of the fringe subtree at a uniformly random vertex.
    pub fn fringe_distribution(&self) -> BTreeMap<PlaneTree, BigRational> {
        let k = self.size() as i64;
        self.fringe_counts()
            .into_iter()
            .map(|(t, c)| (t, BigRational::new(BigInt::from(c), BigInt::from(k))))
            .collect()
    }

    /// Multiplicity of each distinct fringe subtree.
    pub fn fringe_counts(&self) -> BTreeMap<PlaneTree, u64> {
        let sizes = self.subtree_sizes();
        let mut out = BTreeMap::new();
        for (v, &s) in sizes.iter().enumerate() {
            let t = PlaneTree { degrees: self.degrees[v..v + s].to_vec() };
            *out.entry(t).or_insert(0) += 1;
        }
        out
    }

    /// All vertex degrees lie in {0, 1}.
    pub fn is_path(&self) -> bool {
        self.degrees.iter().all(|&d| d <= 1)
    }

    /// Exactly one non-leaf vertex, of degree `|T| - 1`.
    pub fn is_star(&self) -> bool {
        let k = self.size();
        k >= 2 && self.degrees[0] as usize == k - 1
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.degrees.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for PlaneTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let degrees = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad degree {t:?} in tree {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PlaneTree::from_preorder(degrees)
    }
}

impl Serialize for PlaneTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PlaneTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            List(Vec<u32>),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::List(v) => PlaneTree::from_preorder(v).map_err(serde::de::Error::custom),
        }
    }
}

/// Degree statistic `n`: how many vertices have each outdegree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, u64>", into = "BTreeMap<u32, u64>")]
pub struct DegreeStatistic {
    counts: BTreeMap<u32, u64>,
}

impl DegreeStatistic {
    /// Drops zero counts and checks the balance identity
    /// `sum n(i) = 1 + sum i n(i)`.
    pub fn new(counts: BTreeMap<u32, u64>) -> Result<Self> {
        let counts: BTreeMap<u32, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let vertices: u128 = counts.values().map(|&c| c as u128).sum();
        let edges: u128 = counts.iter().map(|(&i, &c)| i as u128 * c as u128).sum();
        if vertices == 0 {
            return Err(Error::InvalidStatistic("no vertices".into()));
        }
        if vertices != edges + 1 {
            return Err(Error::InvalidStatistic(format!(
                "{vertices} vertices but {edges} child slots; need vertices = slots + 1"
            )));
        }
        Ok(DegreeStatistic { counts })
    }

    pub fn from_pairs(pairs: &[(u32, u64)]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &(i, c) in pairs {
            *counts.entry(i).or_insert(0) += c;
        }
        DegreeStatistic::new(counts)
    }

    /// `|n|`, the number of vertices.
    pub fn size(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, degree: u32) -> u64 {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    /// Nonzero entries in ascending degree order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    pub fn max_degree(&self) -> u32 {
        *self.counts.keys().next_back().expect("non-empty")
    }

    /// Sorted degree multiset `c(n)`.
    pub fn degree_multiset(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.size() as usize);
        for (i, c) in self.iter() {
            out.extend(std::iter::repeat_n(i, c as usize));
        }
        out
    }

    /// `|T_n| = |n|! / (|n| prod n(i)!)`.
    pub fn count_trees(&self) -> BigUint {
        let size = self.size();
        let mut denom = BigUint::from(size);
        for (_, c) in self.iter() {
            denom *= factorial(c);
        }
        factorial(size) / denom
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("maps of integers always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("degree statistic: {e}")))
    }
}

impl TryFrom<BTreeMap<u32, u64>> for DegreeStatistic {
    type Error = Error;
    fn try_from(m: BTreeMap<u32, u64>) -> Result<Self> {
        DegreeStatistic::new(m)
    }
}

impl From<DegreeStatistic> for BTreeMap<u32, u64> {
    fn from(s: DegreeStatistic) -> Self {
        s.counts
    }
}

/// Number of trees with the given degree statistic.
pub fn count_trees(stat: &DegreeStatistic) -> BigUint {
    stat.count_trees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn t(s: &str) -> PlaneTree {
        s.parse().unwrap()
    }

    #[test]
    fn decode_examples() {
        assert_eq!(t("0").size(), 1);
        assert_eq!(t("2,0,2,0,0").size(), 5);
        assert_eq!(
            PlaneTree::from_preorder(vec![2, 0, 0, 0]),
            Err(Error::InvalidPreorder { index: 2 })
        );
        assert_eq!(
            PlaneTree::from_preorder(vec![1, 0, 1, 0]),
            Err(Error::InvalidPreorder { index: 1 })
        );
        assert!(PlaneTree::from_preorder(vec![]).is_err());
    }

    #[test]
    fn degree_statistics() {
        let s = t("2,0,2,0,0").degree_statistic();
        assert_eq!(s.to_json(), r#"{"0":3,"2":2}"#);
        assert_eq!(t("1,1,0").degree_statistic().to_json(), r#"{"0":1,"1":2}"#);
        assert_eq!(PlaneTree::leaf().degree_statistic().to_json(), r#"{"0":1}"#);
    }

    #[test]
    fn statistic_json_is_numerically_ordered() {
        let s = DegreeStatistic::from_pairs(&[(0, 10), (10, 1), (2, 0), (1, 3)]).unwrap();
        assert_eq!(s.to_json(), r#"{"0":10,"1":3,"10":1}"#);
        assert_eq!(DegreeStatistic::from_json(&s.to_json()).unwrap(), s);
        assert!(DegreeStatistic::from_json(r#"{"0":2,"2":2}"#).is_err());
    }

    #[test]
    fn fringe_counts() {
        let tree = t("2,0,2,0,0");
        assert_eq!(tree.count_fringe(&PlaneTree::cherry()), 1);
        assert_eq!(tree.count_fringe(&PlaneTree::leaf()), 3);
        assert_eq!(tree.count_fringe(&tree), 1);
        assert_eq!(t("1,1,0").count_fringe(&t("1,0")), 1);
        assert_eq!(PlaneTree::leaf().count_fringe(&tree), 0);
    }

    #[test]
    fn fringe_distributions() {
        let d = t("1,1,0").fringe_distribution();
        assert_eq!(d.len(), 3);
        assert!(d.values().all(|v| *v == rat(1, 3)));
        let d = PlaneTree::cherry().fringe_distribution();
        assert_eq!(d[&PlaneTree::cherry()], rat(1, 3));
        assert_eq!(d[&PlaneTree::leaf()], rat(2, 3));
    }

    #[test]
    fn tree_counts() {
        let s = DegreeStatistic::from_pairs(&[(0, 3), (2, 2)]).unwrap();
        assert_eq!(s.count_trees(), BigUint::from(2u32));
        let s = DegreeStatistic::from_pairs(&[(0, 1)]).unwrap();
        assert_eq!(s.count_trees(), BigUint::from(1u32));
        let s = DegreeStatistic::from_pairs(&[(0, 2), (2, 1)]).unwrap();
        assert_eq!(s.count_trees(), BigUint::from(1u32));
    }

    #[test]
    fn shapes() {
        assert!(PlaneTree::path(3).is_path());
        assert!(PlaneTree::leaf().is_path());
        assert!(PlaneTree::star(3).is_star());
        assert!(PlaneTree::path(2).is_star());
        assert!(!t("2,0,2,0,0").is_star());
        assert_eq!(t("2,1,0,0").children(), vec![vec![1, 3], vec![2], vec![], vec![]]);
        assert_eq!(t("2,1,0,0").fringe_at(1), PlaneTree::path(2));
    }

    #[test]
    fn text_round_trip() {
        let tree = t("[2, 0, 2, 0, 0]");
        assert_eq!(tree.to_string(), "2,0,2,0,0");
        let json = serde_json::to_string(&tree).unwrap();
        assert_eq!(json, "\"2,0,2,0,0\"");
        let back: PlaneTree = serde_json::from_str("[2,0,2,0,0]").unwrap();
        assert_eq!(back, tree);
    }
}

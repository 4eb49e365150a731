//! Exact uniform sampling of plane trees with a given degree statistic, of
//! labelled trees with a given degree sequence, and of conditioned
//! Galton-Watson trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use crate::tree::{vervaat_degrees, DegreeStatistic, PlaneTree};

/// Reproducible RNG handle: a ChaCha8 key from `value` and a ChaCha stream
/// number `stream_id`. Distinct streams of one key never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    #[serde(default)]
    pub stream_id: u64,
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed { value, stream_id: 0 }
    }

    pub fn with_stream(value: u64, stream_id: u64) -> Self {
        Seed { value, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Seed of replicate `index`: same key, stream
    /// `splitmix(stream_id ^ splitmix(index))`.
    pub fn derive(&self, index: u64) -> Seed {
        Seed { value: self.value, stream_id: splitmix64(self.stream_id ^ splitmix64(index)) }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw from the trees with degree statistic `stat`: shuffle the
/// degree multiset, read it as a bridge and rotate at the first minimum.
pub fn sample_uniform_tree(stat: &DegreeStatistic, seed: Seed) -> PlaneTree {
    sample_uniform_tree_with(stat, &mut seed.rng())
}

pub fn sample_uniform_tree_with<R: Rng + ?Sized>(stat: &DegreeStatistic, rng: &mut R) -> PlaneTree {
    let mut degrees = stat.degree_multiset();
    degrees.shuffle(rng);
    vervaat_degrees(&mut degrees);
    PlaneTree::from_preorder_unchecked(degrees)
}

/// Degrees `d_1, ..., d_n` of a labelled tree, indexed by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
        let expected = (degrees.len() as u64).saturating_sub(1);
        if degrees.is_empty() || sum != expected {
            return Err(Error::InvalidDegreeSequence { sum, expected });
        }
        Ok(DegreeSequence { degrees })
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degree_statistic(&self) -> DegreeStatistic {
        let mut counts = std::collections::BTreeMap::new();
        for &d in &self.degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        DegreeStatistic::new(counts).expect("sum d_i = n - 1 balances the statistic")
    }
}

impl TryFrom<Vec<u32>> for DegreeSequence {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        DegreeSequence::new(v)
    }
}

impl From<DegreeSequence> for Vec<u32> {
    fn from(d: DegreeSequence) -> Self {
        d.degrees
    }
}

/// A plane tree whose preorder vertex `v` carries label `labels[v]`
/// (labels are 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabelledTree {
    pub tree: PlaneTree,
    pub labels: Vec<u32>,
}

impl LabelledTree {
    /// Parent label of each label (`0` for the root), a representation that
    /// forgets the child order.
    pub fn parent_array(&self) -> Vec<u32> {
        let mut parent = vec![0; self.labels.len()];
        for (v, ch) in self.tree.children().iter().enumerate() {
            for &c in ch {
                parent[self.labels[c] as usize - 1] = self.labels[v];
            }
        }
        parent
    }
}

/// Uniform plane tree with the degree statistic of `dseq`, then, inside each
/// degree class, a uniform bijection between vertices and the labels with
/// that degree.
pub fn sample_labelled(dseq: &DegreeSequence, seed: Seed) -> LabelledTree {
    let mut rng = seed.rng();
    let tree = sample_uniform_tree_with(&dseq.degree_statistic(), &mut rng);
    let top = *dseq.degrees.iter().max().expect("non-empty") as usize;
    let mut pools: Vec<Vec<u32>> = vec![Vec::new(); top + 1];
    for (label, &d) in dseq.degrees.iter().enumerate() {
        pools[d as usize].push(label as u32 + 1);
    }
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }
    let labels = tree
        .degrees()
        .iter()
        .map(|&d| pools[d as usize].pop().expect("class sizes match"))
        .collect();
    LabelledTree { tree, labels }
}

/// Whether some tree of size `n` has positive probability under `w`.
pub fn gw_feasible(w: &OffspringDistribution, n: u64) -> bool {
    if n == 0 || !w.p(0).is_positive() {
        return false;
    }
    let target = (n - 1) as usize;
    let limit = target.min(u32::MAX as usize) as u32;
    let parts: Vec<usize> = w.support(limit).into_iter().filter(|&i| i > 0).map(|i| i as usize).collect();
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for s in 1..=target {
        reachable[s] = parts.iter().any(|&p| p <= s && reachable[s - p]);
    }
    reachable[target]
}

/// Conditioned Galton-Watson tree of size `n`: redraw `n` iid degrees until
/// they sum to `n - 1`, then sample uniformly given the degree statistic.
pub fn sample_conditioned_gw(
    w: &OffspringDistribution,
    n: u64,
    seed: Seed,
    max_attempts: u64,
) -> Result<PlaneTree> {
    if !gw_feasible(w, n) {
        return Err(Error::InfeasibleSize(n));
    }
    let mut rng = seed.rng();
    let sampler = w.sampler();
    let target = n - 1;
    let mut degrees = vec![0u32; n as usize];
    for _ in 0..max_attempts {
        let mut sum = 0u64;
        let mut over = false;
        for slot in degrees.iter_mut() {
            *slot = sampler.sample(&mut rng);
            sum += *slot as u64;
            if sum > target {
                over = true;
                break;
            }
        }
        if !over && sum == target {
            let mut counts = std::collections::BTreeMap::new();
            for &d in &degrees {
                *counts.entry(d).or_insert(0) += 1;
            }
            let stat = DegreeStatistic::new(counts).expect("sum is n - 1");
            return Ok(sample_uniform_tree_with(&stat, &mut rng));
        }
    }
    // No success was seen, so report the 95% upper bound on the rate.
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
        rate_estimate: 3.0 / max_attempts.max(1) as f64,
    })
}

/// One-hub trees: `n0` leaves, `n1` vertices of degree one and a single
/// vertex of degree `n0`. A uniform weak composition of `n1` into `n0 + 1`
/// parts gives the path lengths above the hub and below each of its
/// children.
pub fn sample_composition_hub(n0: u32, n1: u32, seed: Seed) -> Result<PlaneTree> {
    if n0 < 2 {
        return Err(Error::InvalidStatistic("one-hub trees need n0 >= 2".into()));
    }
    let mut rng = seed.rng();
    let slots = (n0 + n1) as usize;
    let mut bars = rand::seq::index::sample(&mut rng, slots, n0 as usize).into_vec();
    bars.sort_unstable();
    let mut parts = Vec::with_capacity(n0 as usize + 1);
    let mut prev = 0usize;
    for &b in &bars {
        parts.push(b - prev);
        prev = b + 1;
    }
    parts.push(slots - prev);
    Ok(hub_tree(n0, &parts))
}

/// The one-hub tree with path lengths `parts[0]` (above the hub) and
/// `parts[1..]` (one per hub child).
pub fn hub_tree(n0: u32, parts: &[usize]) -> PlaneTree {
    debug_assert_eq!(parts.len(), n0 as usize + 1);
    let mut degrees = vec![1u32; parts[0]];
    degrees.push(n0);
    for &len in &parts[1..] {
        degrees.extend(std::iter::repeat_n(1, len));
        degrees.push(0);
    }
    PlaneTree::from_preorder_unchecked(degrees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn stat(pairs: &[(u32, u64)]) -> DegreeStatistic {
        DegreeStatistic::from_pairs(pairs).unwrap()
    }

    #[test]
    fn degenerate_statistics() {
        assert_eq!(sample_uniform_tree(&stat(&[(0, 1)]), Seed::new(1)), PlaneTree::leaf());
        for s in 0..20 {
            assert_eq!(sample_uniform_tree(&stat(&[(0, 2), (2, 1)]), Seed::new(s)), PlaneTree::cherry());
        }
    }

    #[test]
    fn samples_have_the_right_statistic() {
        let st = stat(&[(0, 41), (1, 7), (2, 12), (5, 3), (9, 2)]);
        for s in 0..50 {
            assert_eq!(sample_uniform_tree(&st, Seed::new(s)).degree_statistic(), st);
        }
    }

    #[test]
    fn seeds_reproduce_and_streams_differ() {
        let st = stat(&[(0, 500), (2, 499)]);
        let a = sample_uniform_tree(&st, Seed::with_stream(9, 3));
        assert_eq!(a, sample_uniform_tree(&st, Seed::with_stream(9, 3)));
        assert_ne!(a, sample_uniform_tree(&st, Seed::with_stream(9, 4)));
        assert_ne!(Seed::new(9).derive(0), Seed::new(9).derive(1));
    }

    #[test]
    fn labelled_examples() {
        let single = sample_labelled(&DegreeSequence::new(vec![0]).unwrap(), Seed::new(0));
        assert_eq!(single.labels, vec![1]);
        let cherry = sample_labelled(&DegreeSequence::new(vec![2, 0, 0]).unwrap(), Seed::new(0));
        assert_eq!(cherry.labels[0], 1);
        assert_eq!(
            DegreeSequence::new(vec![2, 0]),
            Err(Error::InvalidDegreeSequence { sum: 2, expected: 1 })
        );

        let d = DegreeSequence::new(vec![1, 1, 0]).unwrap();
        let mut roots = BTreeMap::new();
        for s in 0..2000 {
            let t = sample_labelled(&d, Seed::new(s));
            assert_eq!(t.labels[2], 3);
            *roots.entry(t.labels[0]).or_insert(0) += 1;
        }
        assert_eq!(roots.len(), 2);
        assert!((roots[&1] as i64 - 1000).abs() < 150);
    }

    #[test]
    fn conditioned_gw_full_binary() {
        let w = OffspringDistribution::full_binary();
        for s in 0..50 {
            let t = sample_conditioned_gw(&w, 5, Seed::new(s), 10_000).unwrap();
            assert_eq!(t.degree_statistic(), stat(&[(0, 3), (2, 2)]));
        }
        assert_eq!(sample_conditioned_gw(&w, 4, Seed::new(0), 100), Err(Error::InfeasibleSize(4)));
        let point: OffspringDistribution = "finite:0=1".parse().unwrap();
        assert_eq!(sample_conditioned_gw(&point, 1, Seed::new(0), 1).unwrap(), PlaneTree::leaf());
    }

    #[test]
    fn hub_trees() {
        assert_eq!(sample_composition_hub(2, 0, Seed::new(0)).unwrap(), PlaneTree::cherry());
        let mut seen = BTreeMap::new();
        for s in 0..3000 {
            let t = sample_composition_hub(2, 1, Seed::new(s)).unwrap();
            assert_eq!(t.degree_statistic(), stat(&[(0, 2), (1, 1), (2, 1)]));
            *seen.entry(t).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 3);
        assert!(seen.values().all(|&c| (c as i64 - 1000).abs() < 150));
    }
}

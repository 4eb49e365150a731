//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use fringelab::offspring::OffspringDistribution;
use fringelab::rational::{falling_factorial_u, int};
use fringelab::tree::enumerate_trees;
use fringelab::{DegreeStatistic, PlaneTree, Seed};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

/// Every tree with the statistic, by brute force.
pub fn all_trees(stat: &DegreeStatistic) -> Vec<PlaneTree> {
    enumerate_trees(stat).expect("small statistic").collect()
}

/// `E Π_j (N_{T_j})_{q_j}` averaged over an explicit tree list.
pub fn brute_joint(trees: &[PlaneTree], patterns: &[PlaneTree], q: &[u64]) -> BigRational {
    let total: BigInt = trees
        .iter()
        .map(|t| {
            patterns
                .iter()
                .zip(q)
                .map(|(p, &k)| BigInt::from(falling_factorial_u(t.count_fringe(p), k)))
                .product::<BigInt>()
        })
        .sum();
    BigRational::new(total, BigInt::from(trees.len()))
}

/// A random finite offspring law with rational masses and mean at most one.
pub fn random_law<R: Rng>(rng: &mut R) -> OffspringDistribution {
    let support_size = rng.random_range(2..=5);
    let mut weights: BTreeMap<u32, BigRational> = BTreeMap::new();
    weights.insert(0, int(rng.random_range(1..=9)));
    while weights.len() < support_size {
        let d = rng.random_range(1..=5u32);
        weights.insert(d, int(rng.random_range(1..=9)));
    }
    let total: BigRational = weights.values().sum();
    for v in weights.values_mut() {
        *v /= &total;
    }
    let mean: BigRational = weights.iter().map(|(&i, p)| p * int(i as u64)).sum();
    if mean > BigRational::one() {
        // mix with a point mass at 0 until the mean is exactly one
        let lambda = BigRational::one() / &mean;
        for v in weights.values_mut() {
            *v *= &lambda;
        }
        *weights.get_mut(&0).expect("present") += BigRational::one() - lambda;
    }
    OffspringDistribution::finite(weights).expect("valid by construction")
}

pub fn law_corpus(seed: u64, count: usize) -> Vec<OffspringDistribution> {
    let mut rng = Seed::new(seed).rng();
    (0..count).map(|_| random_law(&mut rng)).collect()
}

pub fn point_mass(i: u32) -> OffspringDistribution {
    OffspringDistribution::from_pairs(&[(i, 1, 1)]).expect("point mass")
}

/// Trees with sizes in `lo..=hi`.
pub fn trees_between(lo: u64, hi: u64) -> Vec<PlaneTree> {
    (lo..=hi)
        .flat_map(|k| fringelab::tree::all_trees_of_size(k).expect("small"))
        .collect()
}

pub fn is_zero(x: &BigRational) -> bool {
    x.is_zero()
}

/// A balanced statistic built from internal degrees in `1..=3`; leaves fill
/// the rest.
pub fn statistic_from_internal(internal: &[u32]) -> DegreeStatistic {
    let mut counts = BTreeMap::new();
    let mut leaves = 1u64;
    for &d in internal {
        *counts.entry(d).or_insert(0u64) += 1;
        leaves += d as u64 - 1;
    }
    counts.insert(0, leaves);
    DegreeStatistic::new(counts).expect("balanced by construction")
}

/// Proptest strategy for a uniformly drawn plane tree of moderate size.
pub fn arb_tree(max_internal: usize) -> impl proptest::strategy::Strategy<Value = PlaneTree> {
    use proptest::prelude::*;
    (proptest::collection::vec(1u32..=3, 0..=max_internal), any::<u64>())
        .prop_map(|(internal, seed)| fringelab::sampling::sample_uniform_tree(&statistic_from_internal(&internal), Seed::new(seed)))
}

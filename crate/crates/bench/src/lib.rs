//! Fixtures shared by the benches.

use fringelab::harness::StatFamily;
use fringelab::{DegreeStatistic, PlaneTree, Seed};

pub fn binary(size: u64) -> DegreeStatistic {
    StatFamily::FullBinary.statistic(size).expect("size >= 3")
}

pub fn geometric(size: u64) -> DegreeStatistic {
    StatFamily::GeometricProfile.statistic(size).expect("size >= 4")
}

/// A fixed large tree to count patterns in.
pub fn big_tree(size: u64) -> PlaneTree {
    fringelab::sampling::sample_uniform_tree(&geometric(size), Seed::new(1))
}

pub fn patterns() -> Vec<PlaneTree> {
    vec![PlaneTree::cherry(), PlaneTree::path(3), "2,0,2,0,0".parse().expect("valid preorder")]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert_eq!(binary(1001).size(), 1001);
        assert_eq!(big_tree(500).size() as u64, geometric(500).size());
        assert_eq!(patterns().len(), 3);
    }
}

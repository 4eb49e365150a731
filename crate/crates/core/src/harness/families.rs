//! Built-in families of degree statistics indexed by size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use crate::rational::rat;
use crate::tree::DegreeStatistic;

/// A rule producing one degree statistic per requested size, together with
/// the offspring law those statistics converge to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StatFamily {
    /// `n(0) = m + 1`, `n(2) = m`, with `2m + 1` the largest odd size not above
    /// the request.
    FullBinary,
    /// `n(i) = ⌊N 2^{-i-1}⌋` for `i ≥ 1`, then `n(0)` from the balance identity.
    GeometricProfile,
    /// `n1 = ⌊λ √N⌋` unary vertices, one hub of degree `n0`, `n0` leaves.
    OneHub { lambda: f64 },
}

impl StatFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StatFamily::FullBinary => "full_binary",
            StatFamily::GeometricProfile => "geometric_profile",
            StatFamily::OneHub { .. } => "one_hub",
        }
    }

    pub fn statistic(&self, size: u64) -> Result<DegreeStatistic> {
        match self {
            StatFamily::FullBinary => {
                if size < 3 {
                    return Err(Error::SizeTooSmall { size, needed: 3 });
                }
                let m = (size - 1) / 2;
                DegreeStatistic::from_pairs(&[(0, m + 1), (2, m)])
            }
            StatFamily::GeometricProfile => {
                if size < 4 {
                    return Err(Error::SizeTooSmall { size, needed: 4 });
                }
                let mut counts = BTreeMap::new();
                let mut excess = 0u64;
                for i in 1u32.. {
                    let c = size >> (i + 1);
                    if c == 0 {
                        break;
                    }
                    counts.insert(i, c);
                    excess += (i as u64 - 1) * c;
                }
                counts.insert(0, 1 + excess);
                DegreeStatistic::new(counts)
            }
            StatFamily::OneHub { lambda } => {
                let n1 = (lambda * (size as f64).sqrt()).floor().max(0.0) as u64;
                let n0 = size.saturating_sub(n1 + 1);
                if n0 < 2 {
                    return Err(Error::SizeTooSmall { size, needed: n1 + 3 });
                }
                DegreeStatistic::new(BTreeMap::from([(0, n0), (1, n1), (n0 as u32, 1)]))
            }
        }
    }

    /// The limiting offspring law `p`.
    pub fn target(&self) -> OffspringDistribution {
        match self {
            StatFamily::FullBinary => OffspringDistribution::full_binary(),
            StatFamily::GeometricProfile => {
                OffspringDistribution::geometric(rat(1, 2)).expect("valid ratio")
            }
            StatFamily::OneHub { .. } => OffspringDistribution::from_pairs(&[(0, 1, 1)]).expect("point mass"),
        }
    }
}

/// The empirical law `p(n) = n(i)/|n|` of a statistic.
pub fn empirical_law(stat: &DegreeStatistic) -> OffspringDistribution {
    let size = stat.size() as i64;
    let pairs: Vec<(u32, i64, i64)> = stat.iter().map(|(i, c)| (i, c as i64, size)).collect();
    OffspringDistribution::from_pairs(&pairs).expect("mean (|n|-1)/|n| < 1")
}

//! Additive functionals `F(T) = Σ_v f(T_v)`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{gamma_p, pi_p};
use crate::offspring::OffspringDistribution;
use crate::rational::{int, serde_rational, Num};
use crate::tree::PlaneTree;

/// A toll function with finite support.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TollFunction {
    #[serde(with = "toll_serde")]
    support: BTreeMap<PlaneTree, BigRational>,
}

impl TollFunction {
    pub fn new(support: BTreeMap<PlaneTree, BigRational>) -> Self {
        TollFunction { support: support.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn indicator(tree: PlaneTree) -> Self {
        Self::new(BTreeMap::from([(tree, int(1))]))
    }

    /// `1_{|T| = k}` restricted to the given trees.
    pub fn indicator_of(trees: impl IntoIterator<Item = PlaneTree>) -> Self {
        Self::new(trees.into_iter().map(|t| (t, int(1))).collect())
    }

    pub fn insert(&mut self, tree: PlaneTree, value: BigRational) {
        if value.is_zero() {
            self.support.remove(&tree);
        } else {
            self.support.insert(tree, value);
        }
    }

    pub fn get(&self, tree: &PlaneTree) -> BigRational {
        self.support.get(tree).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlaneTree, &BigRational)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

mod toll_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        tree: PlaneTree,
        #[serde(with = "serde_rational")]
        value: BigRational,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<PlaneTree, BigRational>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = m.iter().map(|(t, v)| Entry { tree: t.clone(), value: v.clone() }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<PlaneTree, BigRational>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| (e.tree, e.value)).collect())
    }
}

/// `F(T) = Σ_{T'} f(T') N_{T'}(T)`.
pub fn additive_f(tree: &PlaneTree, f: &TollFunction) -> BigRational {
    f.iter()
        .map(|(pattern, v)| v * int(tree.count_fringe(pattern)))
        .sum()
}

/// Both evaluations of the limit variance of an additive functional.
#[derive(Clone, Debug, Serialize)]
pub struct AdditiveGamma {
    /// From expectations under `π_p`.
    pub direct: Num,
    /// `Σ f(T) f(T') γ_p(T, T')`.
    pub quadratic: Num,
}

impl AdditiveGamma {
    pub fn agree(&self) -> bool {
        match (self.direct.as_exact(), self.quadratic.as_exact()) {
            (Some(a), Some(b)) => a == b,
            _ => {
                let (a, b) = (self.direct.to_f64(), self.quadratic.to_f64());
                (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
            }
        }
    }

    pub fn value(&self) -> &Num {
        &self.direct
    }
}

pub fn additive_gamma(p: &OffspringDistribution, f: &TollFunction) -> AdditiveGamma {
    let weighted: Vec<(&PlaneTree, Num, Num)> =
        f.iter().map(|(t, v)| (t, Num::Exact(v.clone()), pi_p(p, t))).collect();
    let expect = |g: &dyn Fn(&PlaneTree, &Num) -> Num| -> Num {
        weighted.iter().map(|(t, v, pi)| g(t, v) * pi).sum()
    };

    let f_big_f = expect(&|t, v| v * &Num::Exact(additive_f(t, f)));
    let f_sq = expect(&|_, v| v * v);
    let f_size = expect(&|t, v| v * &Num::from_u64(t.size() as u64 - 1));
    let degrees: BTreeSet<u32> = f.iter().flat_map(|(t, _)| t.degrees().iter().copied()).collect();
    let mut by_degree = Num::zero();
    for i in degrees {
        let pi = p.p(i);
        if !pi.is_positive() {
            continue;
        }
        let e = expect(&|t, v| v * &Num::from_u64(t.degree_statistic().get(i)));
        by_degree = by_degree + &e * &e / pi;
    }
    let direct = Num::from_u64(2) * f_big_f - f_sq + &f_size * &f_size - by_degree;

    let mut quadratic = Num::zero();
    for (a, va, _) in &weighted {
        for (b, vb, _) in &weighted {
            quadratic = quadratic + va * vb * gamma_p(p, a, b);
        }
    }
    AdditiveGamma { direct, quadratic }
}

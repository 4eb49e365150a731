//! Limit-law constants for fringe counts.

mod additive;
mod simply_generated;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

pub use additive::{additive_f, additive_gamma, AdditiveGamma, TollFunction};
pub use simply_generated::{
    degree_cov, gw_equivalents, gw_fringe_cov, pi_theta, GWEquivalents, Regime, WeightSequence,
};

use crate::error::{Error, Result};
use crate::moments::check_distinct;
use crate::offspring::OffspringDistribution;
use crate::rational::{int, ExtNum, Num};
use crate::tree::{canonical_unordered, enumerate_orderings, DegreeStatistic, PlaneTree, UnorderedKey};

/// `n_T(i)` and `n_T'(i)` side by side over `D(T) ∪ D(T')`.
fn joint_degrees(t: &PlaneTree, t2: &PlaneTree) -> BTreeMap<u32, (u64, u64)> {
    let mut out: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for (i, n) in t.degree_statistic().iter() {
        out.entry(i).or_default().0 = n;
    }
    for (i, n) in t2.degree_statistic().iter() {
        out.entry(i).or_default().1 = n;
    }
    out
}

/// `Π p_i^{e_i / 2}`, taking one square root of the exact product so the
/// result stays rational whenever it can.
fn sqrt_product(p: &OffspringDistribution, twice_exps: impl Iterator<Item = (u32, u64)>) -> Num {
    let mut prod = Num::one();
    for (i, e) in twice_exps {
        if e > 0 {
            prod = prod * p.p(i).pow(e as u32);
        }
    }
    prod.sqrt()
}

/// Probability that an unconditioned Galton–Watson tree equals `t`.
pub fn pi_p(p: &OffspringDistribution, t: &PlaneTree) -> Num {
    t.degree_statistic()
        .iter()
        .fold(Num::one(), |acc, (i, n)| acc * p.p(i).pow(n as u32))
}

pub fn eta_p(p: &OffspringDistribution, t: &PlaneTree, t2: &PlaneTree) -> ExtNum {
    let mut out = Num::from_u64((t.size() as u64 - 1) * (t2.size() as u64 - 1));
    for (i, (a, b)) in joint_degrees(t, t2) {
        if a * b == 0 {
            continue;
        }
        let pi = p.p(i);
        if pi.is_zero() {
            return ExtNum::NegInf;
        }
        out = out - Num::from_u64(a * b) / pi;
    }
    ExtNum::Finite(out)
}

pub fn gamma_p(p: &OffspringDistribution, t: &PlaneTree, t2: &PlaneTree) -> Num {
    let eta = eta_p(p, t, t2);
    let pi1 = pi_p(p, t);
    if t == t2 {
        let corr = eta.mul_zero_absorbing(&(&pi1 * &pi1)).expect("eta is -inf only when pi vanishes");
        return pi1 + corr;
    }
    let pi2 = pi_p(p, t2);
    let corr = eta.mul_zero_absorbing(&(&pi1 * &pi2)).expect("eta is -inf only when pi vanishes");
    Num::from_u64(t.count_fringe(t2)) * pi1 + Num::from_u64(t2.count_fringe(t)) * pi2 + corr
}

/// `η_p` rescaled by `(π π')^{1/2}` and extended continuously to `π π' = 0`.
pub fn eta_hat(p: &OffspringDistribution, t: &PlaneTree, t2: &PlaneTree) -> Num {
    let joint = joint_degrees(t, t2);
    let scale = Num::from_u64((t.size() as u64 - 1) * (t2.size() as u64 - 1));
    let mut out = if scale.is_zero() {
        Num::zero()
    } else {
        scale * sqrt_product(p, joint.iter().map(|(&j, &(a, b))| (j, a + b)))
    };
    for (&i, &(a, b)) in &joint {
        if a * b == 0 {
            continue;
        }
        let exps = joint
            .iter()
            .map(|(&j, &(aj, bj))| (j, aj + bj - if j == i { 2 } else { 0 }));
        out = out - Num::from_u64(a * b) * sqrt_product(p, exps);
    }
    out
}

/// `γ_p / (π π')^{1/2}`, extended continuously; always finite.
pub fn gamma_hat(p: &OffspringDistribution, t: &PlaneTree, t2: &PlaneTree) -> Num {
    let eta = eta_hat(p, t, t2);
    if t == t2 {
        return Num::one() + eta;
    }
    let mut out = eta;
    let n21 = t.count_fringe(t2);
    if n21 > 0 {
        let (big, small) = (t.degree_statistic(), t2.degree_statistic());
        let exps = big.iter().map(|(i, n)| (i, n - small.get(i)));
        out = out + Num::from_u64(n21) * sqrt_product(p, exps);
    }
    let n12 = t2.count_fringe(t);
    if n12 > 0 {
        let (big, small) = (t2.degree_statistic(), t.degree_statistic());
        let exps = big.iter().map(|(i, n)| (i, n - small.get(i)));
        out = out + Num::from_u64(n12) * sqrt_product(p, exps);
    }
    out
}

/// Patterns whose normalized limit variance vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exceptional {
    None,
    SingleVertex,
    PathP1,
    StarP0,
}

pub fn classify_exceptional(t: &PlaneTree, p: &OffspringDistribution) -> Exceptional {
    if t.size() == 1 {
        Exceptional::SingleVertex
    } else if t.is_path() && p.p(1) == Num::one() {
        Exceptional::PathP1
    } else if t.is_star() && p.p(0) == Num::one() {
        Exceptional::StarP0
    } else {
        Exceptional::None
    }
}

/// `|n| Π (n(i)/|n|)^{n_T(i)}`, the plug-in approximation of the mean count.
pub fn mu_n(stat: &DegreeStatistic, t: &PlaneTree) -> BigRational {
    let size = int(stat.size());
    let mut out = size.clone();
    for (i, k) in t.degree_statistic().iter() {
        let frac = int(stat.get(i)) / &size;
        out *= num_traits::pow(frac, k as usize);
    }
    out
}

/// Probability that the unordered shape of a Galton–Watson tree is `key`.
pub fn pi_un(p: &OffspringDistribution, key: &UnorderedKey, cap: usize) -> Result<Num> {
    let orderings = enumerate_orderings(key, cap)?;
    Ok(Num::from_u64(orderings.len() as u64) * pi_p(p, &key.representative()))
}

/// Number of fringe subtrees of `key` whose unordered shape is `pattern`.
pub fn count_fringe_unordered(key: &UnorderedKey, pattern: &UnorderedKey) -> u64 {
    let tree = key.representative();
    let sizes = tree.subtree_sizes();
    (0..tree.size())
        .filter(|&v| sizes[v] == pattern.size() && &canonical_unordered(&tree.fringe_at(v)) == pattern)
        .count() as u64
}

pub fn gamma_un(p: &OffspringDistribution, a: &UnorderedKey, b: &UnorderedKey, cap: usize) -> Result<Num> {
    let (ta, tb) = (a.representative(), b.representative());
    let eta = eta_p(p, &ta, &tb);
    let pa = pi_un(p, a, cap)?;
    if a == b {
        let corr = eta.mul_zero_absorbing(&(&pa * &pa)).expect("eta is -inf only when pi vanishes");
        return Ok(pa + corr);
    }
    let pb = pi_un(p, b, cap)?;
    let corr = eta.mul_zero_absorbing(&(&pa * &pb)).expect("eta is -inf only when pi vanishes");
    Ok(Num::from_u64(count_fringe_unordered(a, b)) * pa
        + Num::from_u64(count_fringe_unordered(b, a)) * pb
        + corr)
}

/// Symmetric matrix of limit covariances with pattern labels.
#[derive(Clone, Debug, Serialize)]
pub struct CovMatrix {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<Num>>,
}

impl CovMatrix {
    pub fn new(labels: Vec<String>, entries: Vec<Vec<Num>>) -> Result<Self> {
        let m = labels.len();
        if entries.len() != m || entries.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidConfig(format!("covariance matrix must be {m}x{m}")));
        }
        for i in 0..m {
            for j in 0..i {
                let (a, b) = (&entries[i][j], &entries[j][i]);
                let same = match (a.as_exact(), b.as_exact()) {
                    (Some(x), Some(y)) => x == y,
                    _ => (a.to_f64() - b.to_f64()).abs() <= 1e-12 * (1.0 + a.to_f64().abs()),
                };
                if !same {
                    return Err(Error::InvalidConfig(format!("covariance matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(CovMatrix { labels, entries })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Num {
        &self.entries[i][j]
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().flatten().all(Num::is_exact)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| self.entries[i][j].to_f64())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.to_f64().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn determinant(&self) -> f64 {
        self.to_f64().determinant()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

/// The matrix `(γ_p(T_i, T_j))`.
pub fn gamma_matrix(p: &OffspringDistribution, patterns: &[PlaneTree]) -> Result<CovMatrix> {
    check_distinct(patterns)?;
    build_matrix(patterns, |a, b| gamma_p(p, a, b))
}

/// The matrix `(γ̂_p(T_i, T_j))`.
pub fn gamma_hat_matrix(p: &OffspringDistribution, patterns: &[PlaneTree]) -> Result<CovMatrix> {
    check_distinct(patterns)?;
    build_matrix(patterns, |a, b| gamma_hat(p, a, b))
}

pub(crate) fn build_matrix(
    patterns: &[PlaneTree],
    mut entry: impl FnMut(&PlaneTree, &PlaneTree) -> Num,
) -> Result<CovMatrix> {
    let m = patterns.len();
    let mut entries = vec![vec![Num::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let v = entry(&patterns[i], &patterns[j]);
            entries[j][i] = v.clone();
            entries[i][j] = v;
        }
    }
    CovMatrix::new(patterns.iter().map(PlaneTree::to_string).collect(), entries)
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixProbe {
    pub matrix: CovMatrix,
    pub min_eigenvalue: f64,
    pub determinant: f64,
}

/// Spectral diagnostics of `Γ_p`; purely exploratory.
pub fn gamma_matrix_probe(p: &OffspringDistribution, patterns: &[PlaneTree]) -> Result<MatrixProbe> {
    let matrix = gamma_matrix(p, patterns)?;
    Ok(MatrixProbe { min_eigenvalue: matrix.min_eigenvalue(), determinant: matrix.determinant(), matrix })
}

/// Whether `γ̂(T,T) = 0`, decided exactly when possible.
pub fn gamma_hat_vanishes(p: &OffspringDistribution, t: &PlaneTree) -> bool {
    match gamma_hat(p, t, t) {
        Num::Exact(r) => r.is_zero(),
        Num::Float(f) => f.abs() < 1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn t(s: &str) -> PlaneTree {
        s.parse().unwrap()
    }

    fn geo() -> OffspringDistribution {
        OffspringDistribution::geometric(rat(1, 2)).unwrap()
    }

    fn ex(x: Num) -> BigRational {
        x.as_exact().cloned().expect("exact")
    }

    #[test]
    fn cherry_constants_under_geometric_half() {
        let c = PlaneTree::cherry();
        assert_eq!(ex(pi_p(&geo(), &c)), rat(1, 32));
        assert_eq!(eta_p(&geo(), &c, &c).finite().cloned().map(ex), Some(rat(-12, 1)));
        assert_eq!(ex(gamma_p(&geo(), &c, &c)), rat(5, 256));
        assert_eq!(ex(gamma_hat(&geo(), &c, &c)), rat(5, 8));
        assert_eq!(classify_exceptional(&c, &geo()), Exceptional::None);
    }

    #[test]
    fn leaf_eta_and_exceptions() {
        let leaf = PlaneTree::leaf();
        let c = PlaneTree::cherry();
        assert_eq!(ex(eta_p(&geo(), &leaf, &c).finite().unwrap().clone()), rat(-4, 1));
        assert_eq!(ex(gamma_hat(&geo(), &leaf, &leaf)), rat(0, 1));
        assert_eq!(classify_exceptional(&leaf, &geo()), Exceptional::SingleVertex);
        let p1 = OffspringDistribution::from_pairs(&[(1, 1, 1)]).unwrap();
        assert_eq!(classify_exceptional(&PlaneTree::path(3), &p1), Exceptional::PathP1);
        assert!(gamma_hat_vanishes(&p1, &PlaneTree::path(3)));
        let p0 = OffspringDistribution::from_pairs(&[(0, 1, 1)]).unwrap();
        assert_eq!(classify_exceptional(&c, &p0), Exceptional::StarP0);
        assert!(gamma_hat_vanishes(&p0, &c));
    }

    #[test]
    fn vanishing_pi_cases() {
        let binary = OffspringDistribution::full_binary();
        let path = PlaneTree::path(3);
        assert!(pi_p(&binary, &path).is_zero());
        assert!(eta_p(&binary, &path, &path).is_infinite());
        assert!(gamma_p(&binary, &path, &path).is_zero());
        // n_T(1) = 2 at the only vanishing degree
        assert_eq!(ex(gamma_hat(&binary, &path, &path)), rat(1, 1));
    }

    #[test]
    fn continuity_extension_matches() {
        let p = geo();
        let trees = crate::tree::all_trees_of_size(4).unwrap();
        for a in &trees {
            for b in &trees {
                let lhs = gamma_hat(&p, a, b) * (pi_p(&p, a) * pi_p(&p, b)).sqrt();
                let rhs = gamma_p(&p, a, b);
                assert!((lhs.to_f64() - rhs.to_f64()).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn mu_n_example() {
        let stat = DegreeStatistic::from_pairs(&[(0, 3), (2, 2)]).unwrap();
        assert_eq!(mu_n(&stat, &PlaneTree::cherry()), rat(18, 25));
        assert_eq!(mu_n(&stat, &PlaneTree::leaf()), rat(3, 1));
        assert!(mu_n(&stat, &PlaneTree::path(2)).is_zero());
    }

    #[test]
    fn unordered_pi_and_gamma() {
        let key = canonical_unordered(&t("2,0,1,0"));
        assert_eq!(ex(pi_un(&geo(), &key, 12).unwrap()), rat(1, 64));
        let cherry = canonical_unordered(&PlaneTree::cherry());
        assert_eq!(pi_un(&geo(), &cherry, 12).unwrap(), pi_p(&geo(), &PlaneTree::cherry()));
        let other = canonical_unordered(&PlaneTree::path(2));
        let mut total = Num::zero();
        for a in enumerate_orderings(&key, 12).unwrap() {
            for b in enumerate_orderings(&other, 12).unwrap() {
                total = total + gamma_p(&geo(), &a, &b);
            }
        }
        assert_eq!(total, gamma_un(&geo(), &key, &other, 12).unwrap());
    }

    #[test]
    fn matrices() {
        let probe = gamma_matrix_probe(&geo(), &[PlaneTree::cherry()]).unwrap();
        assert_eq!(probe.matrix.get(0, 0), &Num::Exact(rat(5, 256)));
        assert!(probe.determinant > 0.0);
        let two = gamma_matrix_probe(&geo(), &[PlaneTree::cherry(), PlaneTree::path(3)]).unwrap();
        assert!(two.min_eigenvalue > 0.0 && two.determinant > 0.0);
        assert!(gamma_matrix(&geo(), &[PlaneTree::cherry(), PlaneTree::cherry()]).is_err());
    }
}

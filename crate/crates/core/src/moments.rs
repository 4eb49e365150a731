//! Exact moments of fringe-subtree counts in uniform random trees with a
//! given degree statistic, and factorial moments of degree statistics of
//! conditioned Galton-Watson trees.
//!
//! Everything here is exact rational arithmetic. Every term whose falling
//! factorials vanish is short-circuited before any division, which makes the
//! formulas valid for every degree statistic, not only for those with
//! `|n|` above the size threshold of the marked trees.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::offspring::{OffspringDistribution, DEFAULT_TRUNCATION};
use crate::rational::{falling_factorial_u, Num};
use crate::tree::{DegreeStatistic, PlaneTree};

/// Default bound on `m` in [`partial_sum_pmf`].
pub const DEFAULT_PMF_CAP: u64 = 5000;

/// `|n| / (|n|)_len * prod_i (n(i))_{need(i)}`, the probability-like weight
/// of a configuration of disjoint marked fringe trees that together remove
/// `len - 1` vertices from the tree.
fn free_term(stat: &DegreeStatistic, len: u64, need: &BTreeMap<u32, u64>) -> Result<BigRational> {
    let mut numer = BigUint::from(stat.size());
    for (&i, &k) in need {
        if k == 0 {
            continue;
        }
        let f = falling_factorial_u(stat.get(i), k);
        if f.is_zero() {
            return Ok(BigRational::zero());
        }
        numer *= f;
    }
    let denom = falling_factorial_u(stat.size(), len);
    if denom.is_zero() {
        // Cannot happen: a nonzero numerator forces the marked vertices to fit.
        return Err(Error::SizeTooSmall { size: stat.size(), needed: len });
    }
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

fn scaled_need(tree: &PlaneTree, q: u64, into: &mut BTreeMap<u32, u64>) {
    for (i, c) in tree.degree_statistic().iter() {
        *into.entry(i).or_insert(0) += q * c;
    }
}

/// `E N_T` for a uniform tree with degree statistic `stat`.
pub fn mean_count(stat: &DegreeStatistic, tree: &PlaneTree) -> Result<BigRational> {
    factorial_moment(stat, tree, 1)
}

/// `E (N_T)_q`.
pub fn factorial_moment(stat: &DegreeStatistic, tree: &PlaneTree, q: u64) -> Result<BigRational> {
    if q == 0 {
        return Ok(BigRational::one());
    }
    let mut need = BTreeMap::new();
    scaled_need(tree, q, &mut need);
    free_term(stat, q * tree.size() as u64 - q + 1, &need)
}

/// `E N_T N_T'` for distinct `T`, `T'`.
pub fn product_moment(stat: &DegreeStatistic, t1: &PlaneTree, t2: &PlaneTree) -> Result<BigRational> {
    if t1 == t2 {
        return Err(Error::EqualPatterns);
    }
    let mut need = BTreeMap::new();
    scaled_need(t1, 1, &mut need);
    scaled_need(t2, 1, &mut need);
    let disjoint = free_term(stat, (t1.size() + t2.size()) as u64 - 1, &need)?;
    let a = BigRational::from_integer(BigInt::from(t2.count_fringe(t1)));
    let b = BigRational::from_integer(BigInt::from(t1.count_fringe(t2)));
    Ok(a * mean_count(stat, t2)? + b * mean_count(stat, t1)? + disjoint)
}

/// `tau[j][k] = N_{T_j}(T_k)` off the diagonal, zero on it.
pub fn bound_matrix(patterns: &[PlaneTree]) -> Vec<Vec<u64>> {
    patterns
        .iter()
        .enumerate()
        .map(|(j, tj)| {
            patterns
                .iter()
                .enumerate()
                .map(|(k, tk)| if j == k { 0 } else { tk.count_fringe(tj) })
                .collect()
        })
        .collect()
}

/// Errors on the first pattern equal to an earlier one.
pub fn check_distinct(patterns: &[PlaneTree]) -> Result<()> {
    for (i, t) in patterns.iter().enumerate() {
        if patterns[..i].contains(t) {
            return Err(Error::DuplicatePatterns(i));
        }
    }
    Ok(())
}

/// `E S_b`: expected number of marked sequences in which exactly `b[j]` of
/// the `q[j]` copies of `T_j` lie inside another marked tree.
pub fn marked_sequence_moment(
    stat: &DegreeStatistic,
    patterns: &[PlaneTree],
    tau: &[Vec<u64>],
    q: &[u64],
    b: &[u64],
) -> Result<BigRational> {
    let m = patterns.len();
    if b.iter().zip(q).any(|(bj, qj)| bj > qj) {
        return Ok(BigRational::zero());
    }
    let mut combinatorial = BigUint::one();
    let mut denom = BigUint::one();
    for j in 0..m {
        if b[j] == 0 {
            continue;
        }
        let slots: u64 = (0..m).map(|k| (q[k] - b[k]) * tau[j][k]).sum();
        let ways = falling_factorial_u(slots, b[j]);
        if ways.is_zero() {
            return Ok(BigRational::zero());
        }
        combinatorial *= falling_factorial_u(q[j], b[j]) * ways;
        denom *= crate::rational::factorial(b[j]);
    }
    let mut need = BTreeMap::new();
    let mut len = 1u64;
    for j in 0..m {
        let free = q[j] - b[j];
        scaled_need(&patterns[j], free, &mut need);
        len += free * (patterns[j].size() as u64 - 1);
    }
    let base = free_term(stat, len, &need)?;
    Ok(base * BigRational::new(BigInt::from(combinatorial), BigInt::from(denom)))
}

/// `E prod_j (N_{T_j})_{q_j}` for distinct patterns, as the sum of `E S_b`
/// over the box `0 <= b <= q`.
pub fn joint_factorial_moment(
    stat: &DegreeStatistic,
    patterns: &[PlaneTree],
    q: &[u64],
) -> Result<BigRational> {
    if patterns.len() != q.len() {
        return Err(Error::InvalidConfig(format!(
            "{} patterns but {} exponents",
            patterns.len(),
            q.len()
        )));
    }
    check_distinct(patterns)?;
    let tau = bound_matrix(patterns);
    let mut total = BigRational::zero();
    let mut b = vec![0u64; q.len()];
    loop {
        total += marked_sequence_moment(stat, patterns, &tau, q, &b)?;
        // odometer over the box
        let mut j = 0;
        loop {
            if j == b.len() {
                return Ok(total);
            }
            if b[j] < q[j] {
                b[j] += 1;
                break;
            }
            b[j] = 0;
            j += 1;
        }
    }
}

/// Law of `S_m = xi_1 + ... + xi_m` for iid `xi_j ~ w`.
#[derive(Clone, Debug)]
pub enum PartialSumPmf {
    /// `P(S_m = s) = numer[s] / denom`.
    Exact { numer: Vec<BigUint>, denom: BigUint },
    /// Float fallback for irrational or infinite-support weights (support cut
    /// at the truncation index).
    Float(Vec<f64>),
}

impl PartialSumPmf {
    pub fn is_exact(&self) -> bool {
        matches!(self, PartialSumPmf::Exact { .. })
    }

    pub fn prob(&self, s: u64) -> Num {
        match self {
            PartialSumPmf::Exact { numer, denom } => {
                let n = numer.get(s as usize).cloned().unwrap_or_default();
                Num::Exact(BigRational::new(BigInt::from(n), BigInt::from(denom.clone())))
            }
            PartialSumPmf::Float(p) => Num::Float(p.get(s as usize).copied().unwrap_or(0.0)),
        }
    }

    /// Largest reachable value plus one.
    pub fn len(&self) -> usize {
        match self {
            PartialSumPmf::Exact { numer, .. } => numer.len(),
            PartialSumPmf::Float(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type PmfCache = RwLock<HashMap<(String, u64), Arc<PartialSumPmf>>>;

fn pmf_cache() -> &'static PmfCache {
    static CACHE: OnceLock<PmfCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Exact law of `S_m` by iterated dense convolution over a common
/// denominator; memoized per `(w, m)`.
pub fn partial_sum_pmf(w: &OffspringDistribution, m: u64) -> Result<Arc<PartialSumPmf>> {
    partial_sum_pmf_capped(w, m, DEFAULT_PMF_CAP)
}

pub fn partial_sum_pmf_capped(
    w: &OffspringDistribution,
    m: u64,
    cap: u64,
) -> Result<Arc<PartialSumPmf>> {
    if m > cap {
        return Err(Error::CapExceeded { size: m as usize, cap: cap as usize });
    }
    let key = (w.to_string(), m);
    if let Some(hit) = pmf_cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let pmf = Arc::new(match w.exact_table() {
        Ok(table) => exact_convolution_power(&table, m),
        Err(_) => float_convolution_power(w, m),
    });
    pmf_cache().write().expect("cache lock").insert(key, Arc::clone(&pmf));
    Ok(pmf)
}

fn exact_convolution_power(table: &BTreeMap<u32, BigRational>, m: u64) -> PartialSumPmf {
    let common = table
        .values()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let top = *table.keys().next_back().unwrap_or(&0) as usize;
    let mut step = vec![BigUint::zero(); top + 1];
    for (&i, p) in table {
        let scaled = p * BigRational::from_integer(common.clone());
        step[i as usize] = scaled.to_integer().to_biguint().expect("non-negative");
    }
    let mut acc = vec![BigUint::one()];
    for _ in 0..m {
        let mut next = vec![BigUint::zero(); acc.len() + top];
        for (s, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (i, c) in step.iter().enumerate() {
                if !c.is_zero() {
                    next[s + i] += a * c;
                }
            }
        }
        acc = next;
    }
    let denom = num_traits::pow(common.to_biguint().expect("positive"), m as usize);
    PartialSumPmf::Exact { numer: acc, denom }
}

fn float_convolution_power(w: &OffspringDistribution, m: u64) -> PartialSumPmf {
    let top = w.max_degree().unwrap_or(DEFAULT_TRUNCATION).min(DEFAULT_TRUNCATION) as usize;
    let step: Vec<f64> = (0..=top as u32).map(|i| w.p_f64(i)).collect();
    let mut acc = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; acc.len() + top];
        for (s, a) in acc.iter().enumerate() {
            for (i, c) in step.iter().enumerate() {
                next[s + i] += a * c;
            }
        }
        acc = next;
    }
    PartialSumPmf::Float(acc)
}

/// `E prod_i (n_{T_{w,n}}(i))_{q_i}` for the conditioned Galton-Watson tree
/// of size `n`:
/// `(n)_{sum q} prod w_i^{q_i} P(S_{n - sum q} = n - 1 - sum i q_i) / P(S_n = n - 1)`.
pub fn degree_factorial_moment(
    w: &OffspringDistribution,
    n: u64,
    q: &BTreeMap<u32, u64>,
) -> Result<BigRational> {
    let table = w.exact_table()?;
    if n == 0 {
        return Err(Error::InfeasibleSize(0));
    }
    let denom = partial_sum_pmf(w, n)?.prob(n - 1);
    let denom = denom.as_exact().expect("exact table gives exact pmf").clone();
    if denom.is_zero() {
        return Err(Error::InfeasibleSize(n));
    }
    let total_q: u64 = q.values().sum();
    let weighted: u64 = q.iter().map(|(&i, &k)| i as u64 * k).sum();
    if total_q > n || weighted > n - 1 {
        return Ok(BigRational::zero());
    }
    let mut value = BigRational::from_integer(BigInt::from(falling_factorial_u(n, total_q)));
    for (&i, &k) in q {
        let wi = table.get(&i).cloned().unwrap_or_else(BigRational::zero);
        value *= num_traits::pow(wi, k as usize);
    }
    if value.is_zero() {
        return Ok(value);
    }
    let numer = partial_sum_pmf(w, n - total_q)?.prob(n - 1 - weighted);
    Ok(value * numer.as_exact().expect("exact").clone() / denom)
}

/// `ln((x)_k / x^k)`, used to sanity-check the falling-factorial estimate.
pub fn log_falling_ratio(x: u64, k: u64) -> f64 {
    let ff = falling_factorial_u(x, k);
    if ff.is_zero() {
        return f64::NEG_INFINITY;
    }
    crate::rational::ln_biguint(&ff) - k as f64 * (x as f64).ln()
}

/// Exact `E X` and `E (X)_2` turned into a variance, for convenience.
pub fn exact_variance(stat: &DegreeStatistic, tree: &PlaneTree) -> Result<BigRational> {
    let m = mean_count(stat, tree)?;
    let f2 = factorial_moment(stat, tree, 2)?;
    Ok(f2 + &m - &m * &m)
}

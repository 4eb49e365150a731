//! Simply generated trees and their Galton–Watson equivalents.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{build_matrix, CovMatrix};
use crate::error::{Error, Result};
use crate::offspring::{OffspringDistribution, DEFAULT_TRUNCATION};
use crate::rational::{format_rational, parse_rational, ExtNum, Num};
use crate::tree::PlaneTree;

const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-12;
const MAX_EXACT_DENOMINATOR: u64 = 1_000_000;

/// Tree weights `w_i`, unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSequence {
    Finite(BTreeMap<u32, BigRational>),
    /// `w_i = 1` (plane trees); radius 1.
    Ones { truncation: u32 },
    /// `w_i = 1/i!` (labelled trees); entire.
    InverseFactorial { truncation: u32 },
    /// `w_0 = 1`, `w_i = c·i^{-β}`; radius 1.
    PowerLaw { c: f64, beta: f64, truncation: u32 },
}

impl WeightSequence {
    pub fn finite(weights: BTreeMap<u32, BigRational>) -> Result<Self> {
        if weights.values().any(Signed::is_negative) {
            return Err(Error::InvalidWeights("negative weight".into()));
        }
        let weights: BTreeMap<u32, BigRational> = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        if !weights.contains_key(&0) {
            return Err(Error::InvalidWeights("w_0 must be positive".into()));
        }
        if !weights.keys().any(|&i| i >= 2) {
            return Err(Error::InvalidWeights("some w_i with i >= 2 must be positive".into()));
        }
        Ok(WeightSequence::Finite(weights))
    }

    pub fn from_pairs(pairs: &[(u32, i64, i64)]) -> Result<Self> {
        Self::finite(
            pairs
                .iter()
                .map(|&(i, n, d)| (i, BigRational::new(n.into(), d.into())))
                .collect(),
        )
    }

    pub fn all_ones(truncation: u32) -> Self {
        WeightSequence::Ones { truncation: truncation.max(2) }
    }

    pub fn inverse_factorial(truncation: u32) -> Self {
        WeightSequence::InverseFactorial { truncation: truncation.max(2) }
    }

    pub fn power_law(c: f64, beta: f64, truncation: u32) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidWeights(format!("power law needs c > 0, beta > 0 (got {c}, {beta})")));
        }
        Ok(WeightSequence::PowerLaw { c, beta, truncation: truncation.max(2) })
    }

    /// Weights of a Galton–Watson law, which is equivalent to itself.
    pub fn from_offspring(p: &OffspringDistribution) -> Result<Self> {
        match p {
            OffspringDistribution::Finite(m) => Self::finite(m.clone()),
            OffspringDistribution::Geometric { .. } | OffspringDistribution::Poisson { .. }
                if p.p(0).is_zero() || p.p(2).is_zero() =>
            {
                Err(Error::InvalidWeights("degenerate offspring law".into()))
            }
            // geometric and Poisson laws are tilts of the two named families
            OffspringDistribution::Geometric { .. } => Ok(Self::all_ones(DEFAULT_TRUNCATION)),
            OffspringDistribution::Poisson { truncation, .. } => Ok(Self::inverse_factorial(*truncation)),
            OffspringDistribution::PowerLaw { c, beta, truncation } => {
                let p0 = p.p_f64(0);
                if p0 <= 0.0 {
                    return Err(Error::InvalidWeights("w_0 must be positive".into()));
                }
                Self::power_law(c / p0, *beta, *truncation)
            }
        }
    }

    /// `a·b^i·w_i`, an equivalent sequence.
    pub fn tilt(&self, a: &BigRational, b: &BigRational) -> Result<Self> {
        match self {
            WeightSequence::Finite(m) => Self::finite(
                m.iter()
                    .map(|(&i, w)| (i, a * num_traits::pow(b.clone(), i as usize) * w))
                    .collect(),
            ),
            _ => Err(Error::InvalidWeights("tilting is only supported for finite weights".into())),
        }
    }

    /// Radius of convergence of `Φ_w`.
    pub fn radius(&self) -> f64 {
        match self {
            WeightSequence::Finite(_) | WeightSequence::InverseFactorial { .. } => f64::INFINITY,
            WeightSequence::Ones { .. } | WeightSequence::PowerLaw { .. } => 1.0,
        }
    }

    /// `(i, ln w_i)` over the (truncated) support.
    fn log_table(&self) -> Vec<(u32, f64)> {
        match self {
            WeightSequence::Finite(m) => m.iter().map(|(&i, w)| (i, ln_positive(w))).collect(),
            WeightSequence::Ones { truncation } => (0..=*truncation).map(|i| (i, 0.0)).collect(),
            WeightSequence::InverseFactorial { truncation } => {
                let mut acc = 0.0;
                (0..=*truncation)
                    .map(|i| {
                        if i > 0 {
                            acc -= (i as f64).ln();
                        }
                        (i, acc)
                    })
                    .collect()
            }
            WeightSequence::PowerLaw { c, beta, truncation } => std::iter::once((0, 0.0))
                .chain((1..=*truncation).map(|i| (i, c.ln() - beta * (i as f64).ln())))
                .collect(),
        }
    }

    /// Tail sums `Σ_{i>K} i^k w_i` at `s = 1` for the power law, `k = 0, 1, 2`.
    fn power_tails(&self) -> Option<[f64; 3]> {
        let WeightSequence::PowerLaw { c, beta, truncation } = self else { return None };
        let edge = *truncation as f64 + 0.5;
        let tail = |k: f64| {
            let e = beta - k;
            if e <= 1.0 {
                f64::INFINITY
            } else {
                c * edge.powf(1.0 - e) / (e - 1.0)
            }
        };
        Some([tail(0.0), tail(1.0), tail(2.0)])
    }
}

fn ln_positive(x: &BigRational) -> f64 {
    crate::rational::ln_rational(x)
}

/// `Σ i^k w_i s^i` for `k = 0, 1, 2`, all scaled by one common positive factor.
fn scaled_moments(table: &[(u32, f64)], s: f64) -> [f64; 3] {
    if s == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let ls = s.ln();
    let logs: Vec<f64> = table.iter().map(|&(i, lw)| lw + i as f64 * ls).collect();
    let top = max_log_term(table, ls);
    let mut m = [0.0; 3];
    for (&(i, _), &l) in table.iter().zip(&logs) {
        let t = (l - top).exp();
        let i = i as f64;
        m[0] += t;
        m[1] += i * t;
        m[2] += i * i * t;
    }
    m
}

fn max_log_term(table: &[(u32, f64)], ln_s: f64) -> f64 {
    table.iter().map(|&(i, lw)| lw + i as f64 * ln_s).fold(f64::NEG_INFINITY, f64::max)
}

fn psi(table: &[(u32, f64)], s: f64) -> f64 {
    let m = scaled_moments(table, s);
    m[1] / m[0]
}

/// Galton–Watson law equivalent to a weight sequence, with its tilting data.
#[derive(Clone, Debug, Serialize)]
pub struct GWEquivalents {
    pub tau: Num,
    pub rho: ExtNum,
    pub nu: ExtNum,
    /// `θ_i`, indexed by degree; entries past the end are zero.
    pub theta: Vec<Num>,
    pub sigma2: ExtNum,
    pub varsigma2: ExtNum,
}

impl GWEquivalents {
    pub fn theta_i(&self, i: u32) -> Num {
        self.theta.get(i as usize).cloned().unwrap_or_else(Num::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.tau.is_exact() && self.theta.iter().all(Num::is_exact)
    }

    /// `θ(w)` as an exact offspring law, when it is one.
    pub fn theta_distribution(&self) -> Option<OffspringDistribution> {
        let table: Option<BTreeMap<u32, BigRational>> = self
            .theta
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_zero())
            .map(|(i, t)| t.as_exact().map(|r| (i as u32, r.clone())))
            .collect();
        OffspringDistribution::finite(table?).ok()
    }

    pub fn theta_mean(&self) -> f64 {
        self.theta.iter().enumerate().map(|(i, t)| i as f64 * t.to_f64()).sum()
    }
}

type Cache = RwLock<HashMap<String, Arc<GWEquivalents>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Solve for `τ_w` and tilt `w` into the equivalent offspring law. Memoized.
pub fn gw_equivalents(w: &WeightSequence) -> Result<Arc<GWEquivalents>> {
    let key = w.to_string();
    if let Some(hit) = cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let eq = Arc::new(solve(w)?);
    cache().write().expect("cache lock").insert(key, Arc::clone(&eq));
    Ok(eq)
}

fn solve(w: &WeightSequence) -> Result<GWEquivalents> {
    let table = w.log_table();
    let rho = w.radius();
    let tails = w.power_tails();
    // Ψ at the radius, with the analytic tail when there is one
    let nu = match (w, tails) {
        (WeightSequence::Finite(m), _) => *m.keys().next_back().expect("nonempty") as f64,
        (WeightSequence::Ones { .. } | WeightSequence::InverseFactorial { .. }, _) => f64::INFINITY,
        (_, Some(t)) => {
            if t[1].is_infinite() {
                f64::INFINITY
            } else {
                let m = scaled_moments(&table, 1.0);
                let scale = (-max_log_term(&table, 0.0)).exp();
                (m[1] + scale * t[1]) / (m[0] + scale * t[0])
            }
        }
        _ => unreachable!(),
    };

    let tau_f = if nu < 1.0 {
        rho
    } else {
        let mut hi = rho.min(1.0);
        while psi(&table, hi) < 1.0 {
            if hi >= rho {
                // truncated sums fall short of the analytic ν; τ sits at the edge
                break;
            }
            hi = (hi * 2.0).min(rho);
            if hi > 1e300 {
                return Err(Error::NotConverged("no bracket for psi(s) = 1".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..MAX_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if psi(&table, mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if hi - lo > TOLERANCE * hi {
            return Err(Error::NotConverged(format!("bracket [{lo}, {hi}] after {MAX_ITERATIONS} steps")));
        }
        let tau = 0.5 * (lo + hi);
        if (psi(&table, tau) - 1.0).abs() > 1e-9 && tau < rho {
            return Err(Error::NotConverged(format!("psi({tau}) = {}", psi(&table, tau))));
        }
        tau
    };

    if let WeightSequence::Finite(m) = w {
        if let Some(tau) = exact_root(m, tau_f) {
            return Ok(exact_equivalents(m, tau, nu));
        }
    }

    let mut m = scaled_moments(&table, tau_f);
    let at_edge_with_tail = tau_f == 1.0 && tails.is_some();
    let ls = tau_f.ln();
    let top = max_log_term(&table, ls);
    if at_edge_with_tail {
        let t = tails.expect("checked");
        let scale = (-top).exp();
        m = [m[0] + scale * t[0], m[1] + scale * t[1], m[2] + scale * t[2]];
    }
    let mut theta = vec![Num::zero(); table.last().map_or(0, |&(i, _)| i as usize + 1)];
    for &(i, lw) in &table {
        theta[i as usize] = Num::Float((lw + i as f64 * ls - top).exp() / m[0]);
    }
    let mean = m[1] / m[0];
    let sigma2 = m[2] / m[0] - mean * mean;
    let sigma2 = if sigma2.is_finite() { ExtNum::Finite(Num::Float(sigma2.max(0.0))) } else { ExtNum::PosInf };
    Ok(GWEquivalents {
        tau: Num::Float(tau_f),
        rho: ext(rho),
        nu: ext(nu),
        varsigma2: varsigma(nu, &sigma2),
        theta,
        sigma2,
    })
}

fn ext(x: f64) -> ExtNum {
    if x.is_infinite() {
        ExtNum::PosInf
    } else {
        ExtNum::Finite(Num::Float(x))
    }
}

fn varsigma(nu: f64, sigma2: &ExtNum) -> ExtNum {
    match sigma2 {
        ExtNum::Finite(s) if nu >= 1.0 && s.is_positive() => sigma2.clone(),
        _ => ExtNum::PosInf,
    }
}

/// Continued-fraction convergents of `x` with small denominators.
fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (1u128, 0u128);
    let (mut k0, mut k1) = (0u128, 1u128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if !(0.0..1e15).contains(&a) {
            break;
        }
        let a = a as u128;
        let (h, k) = (a * h0 + h1, a * k0 + k1);
        if k > max_den as u128 || h > u64::MAX as u128 {
            break;
        }
        out.push((h as u64, k as u64));
        (h1, h0, k1, k0) = (h0, h, k0, k);
        let frac = r - r.floor();
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// A rational `τ` with `Σ (i-1) w_i τ^i = 0` exactly, if one is nearby.
fn exact_root(w: &BTreeMap<u32, BigRational>, tau: f64) -> Option<BigRational> {
    convergents(tau, MAX_EXACT_DENOMINATOR).into_iter().rev().find_map(|(h, k)| {
        if h == 0 {
            return None;
        }
        let r = BigRational::new(BigInt::from(h), BigInt::from(k));
        let f: BigRational = w
            .iter()
            .map(|(&i, wi)| wi * num_traits::pow(r.clone(), i as usize) * BigRational::from_integer(BigInt::from(i as i64 - 1)))
            .sum();
        f.is_zero().then_some(r)
    })
}

fn exact_equivalents(w: &BTreeMap<u32, BigRational>, tau: BigRational, nu: f64) -> GWEquivalents {
    let terms: BTreeMap<u32, BigRational> =
        w.iter().map(|(&i, wi)| (i, wi * num_traits::pow(tau.clone(), i as usize))).collect();
    let phi: BigRational = terms.values().sum();
    let top = *w.keys().next_back().expect("nonempty") as usize;
    let mut theta = vec![Num::zero(); top + 1];
    let mut second = BigRational::zero();
    for (&i, t) in &terms {
        let th = t / &phi;
        second += &th * BigRational::from_integer(BigInt::from(i as u64 * i as u64));
        theta[i as usize] = Num::Exact(th);
    }
    // the mean is exactly 1 at an interior root
    let sigma2 = ExtNum::Finite(Num::Exact(second - BigRational::one()));
    GWEquivalents {
        tau: Num::Exact(tau),
        rho: ExtNum::PosInf,
        nu: ext(nu),
        varsigma2: varsigma(nu, &sigma2),
        theta,
        sigma2,
    }
}

/// `π_θ(T)` for the equivalent law.
pub fn pi_theta(eq: &GWEquivalents, t: &PlaneTree) -> Num {
    t.degree_statistic()
        .iter()
        .fold(Num::one(), |acc, (i, n)| acc * eq.theta_i(i).pow(n as u32))
}

/// Which limit regime the covariance formulas are used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Finite-variance regime when it can be verified, otherwise an error.
    Auto,
    /// `ν ≥ 1` and `0 < σ² < ∞`; verified.
    FiniteVariance,
    /// `ν ≥ 1`, infinite variance, stable domain of attraction; asserted by the caller.
    StableAsserted,
    /// `0 < ν < 1` with a power-law tail of `θ`; asserted by the caller.
    SubcriticalAsserted,
}

/// `1/ς²` for a regime, or why the regime does not apply.
fn inverse_varsigma2(eq: &GWEquivalents, regime: Regime) -> Result<Num> {
    let nu = eq.nu.to_f64();
    let finite_var = matches!(&eq.sigma2, ExtNum::Finite(s) if s.is_positive());
    match regime {
        Regime::Auto | Regime::FiniteVariance => {
            if nu >= 1.0 && finite_var {
                Ok(eq.varsigma2.recip())
            } else {
                Err(Error::UnsupportedRegime(format!(
                    "finite-variance regime needs nu >= 1 and 0 < sigma2 < inf (nu = {}, sigma2 = {}); \
                     assert the stable or subcritical regime explicitly",
                    eq.nu.render(),
                    eq.sigma2.render()
                )))
            }
        }
        Regime::StableAsserted if nu >= 1.0 => Ok(Num::zero()),
        Regime::SubcriticalAsserted if nu > 0.0 && nu < 1.0 => Ok(Num::zero()),
        _ => Err(Error::UnsupportedRegime(format!("regime {regime:?} does not fit nu = {}", eq.nu.render()))),
    }
}

/// Limit covariances of fringe counts in simply generated trees.
pub fn gw_fringe_cov(w: &WeightSequence, patterns: &[PlaneTree], regime: Regime) -> Result<CovMatrix> {
    crate::moments::check_distinct(patterns)?;
    let eq = gw_equivalents(w)?;
    let inv = inverse_varsigma2(&eq, regime)?;
    build_matrix(patterns, |a, b| {
        let pa = pi_theta(&eq, a);
        if a == b {
            let c = Num::from_u64(2 * a.size() as u64 - 1) + inv.clone();
            return pa.clone() - c * &pa * &pa;
        }
        let pb = pi_theta(&eq, b);
        let c = Num::from_u64((a.size() + b.size()) as u64 - 1) + inv.clone();
        Num::from_u64(a.count_fringe(b)) * &pa + Num::from_u64(b.count_fringe(a)) * &pb - c * &pa * &pb
    })
}

/// Limit covariances of the degree counts `n(0), …, n(k)`.
pub fn degree_cov(w: &WeightSequence, k: u32, regime: Regime) -> Result<CovMatrix> {
    let eq = gw_equivalents(w)?;
    let inv = inverse_varsigma2(&eq, regime)?;
    let m = k as usize + 1;
    let mut entries = vec![vec![Num::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let (ti, tj) = (eq.theta_i(i as u32), eq.theta_i(j as u32));
            let cross = Num::from_i64((i as i64 - 1) * (j as i64 - 1)) * &inv;
            entries[i][j] = if i == j {
                &ti * &(Num::one() - ti.clone()) - cross * &ti * &ti
            } else {
                -(&ti * &tj) - cross * &ti * &tj
            };
        }
    }
    CovMatrix::new((0..m).map(|i| i.to_string()).collect(), entries)
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Finite(m) => {
                let parts: Vec<String> = m.iter().map(|(i, w)| format!("{i}={}", format_rational(w))).collect();
                write!(f, "finite:{}", parts.join(","))
            }
            WeightSequence::Ones { truncation } => write!(f, "ones:{truncation}"),
            WeightSequence::InverseFactorial { truncation } => write!(f, "inverse-factorial:{truncation}"),
            WeightSequence::PowerLaw { c, beta, truncation } => write!(f, "powerlaw:{c:?}:{beta:?}:{truncation}"),
        }
    }
}

impl FromStr for WeightSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let truncation = |field: Option<&str>| -> Result<u32> {
            match field {
                None | Some("") => Ok(DEFAULT_TRUNCATION),
                Some(t) => t.parse().map_err(|_| Error::Parse(format!("bad truncation {t:?}"))),
            }
        };
        let float = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}")));
        match name {
            "ones" | "plane" => Ok(Self::all_ones(truncation(Some(rest))?)),
            "inverse-factorial" | "cayley" => Ok(Self::inverse_factorial(truncation(Some(rest))?)),
            "powerlaw" => {
                let f: Vec<&str> = rest.split(':').collect();
                if f.len() < 2 {
                    return Err(Error::Parse("powerlaw:C:BETA[:K]".into()));
                }
                Self::power_law(float(f[0])?, float(f[1])?, truncation(f.get(2).copied())?)
            }
            "finite" => {
                let mut m = BTreeMap::new();
                for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
                    let (i, v) = part
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected i=w, got {part:?}")))?;
                    let i: u32 = i.trim().parse().map_err(|_| Error::Parse(format!("bad index {i:?}")))?;
                    m.insert(i, parse_rational(v)?);
                }
                Self::finite(m)
            }
            _ if s.starts_with('(') || s.starts_with('[') || s.contains(',') => {
                // a bare list of weights w_0, w_1, ...
                let body = s.trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
                let mut m = BTreeMap::new();
                for (i, v) in body.split(',').enumerate() {
                    m.insert(i as u32, parse_rational(v)?);
                }
                Self::finite(m)
            }
            other => Err(Error::UnsupportedTail(format!(
                "no tail bound for weight family {other:?}; use finite, ones, inverse-factorial or powerlaw"
            ))),
        }
    }
}

impl Serialize for WeightSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn full_binary_weights() {
        let w = WeightSequence::from_pairs(&[(0, 1, 1), (2, 1, 1)]).unwrap();
        let eq = gw_equivalents(&w).unwrap();
        assert_eq!(eq.tau, Num::Exact(rat(1, 1)));
        assert_eq!(eq.theta, vec![Num::Exact(rat(1, 2)), Num::zero(), Num::Exact(rat(1, 2))]);
        assert_eq!(eq.sigma2, ExtNum::Finite(Num::Exact(rat(1, 1))));
        assert_eq!(eq.nu.to_f64(), 2.0);
        let cov = gw_fringe_cov(&w, &[PlaneTree::cherry()], Regime::Auto).unwrap();
        assert_eq!(cov.get(0, 0), &Num::Exact(rat(1, 32)));
        let deg = degree_cov(&w, 2, Regime::Auto).unwrap();
        assert!(deg.get(0, 0).is_zero());
        assert!(deg.get(0, 2).is_zero());
        assert!(deg.get(2, 2).is_zero());
    }

    #[test]
    fn plane_tree_weights() {
        let eq = gw_equivalents(&WeightSequence::all_ones(64)).unwrap();
        assert!((eq.tau.to_f64() - 0.5).abs() < 1e-12);
        for i in 0..20 {
            assert!((eq.theta_i(i).to_f64() - 0.5f64.powi(i as i32 + 1)).abs() < 1e-12);
        }
        assert!((eq.sigma2.to_f64() - 2.0).abs() < 1e-12);
        assert!(eq.nu.is_infinite());
    }

    #[test]
    fn cayley_weights() {
        let eq = gw_equivalents(&WeightSequence::inverse_factorial(64)).unwrap();
        assert!((eq.tau.to_f64() - 1.0).abs() < 1e-12);
        assert!((eq.theta_i(0).to_f64() - (-1f64).exp()).abs() < 1e-12);
        assert!((eq.sigma2.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_law_is_a_fixed_point() {
        let w = WeightSequence::from_pairs(&[(0, 1, 4), (1, 1, 2), (2, 1, 4)]).unwrap();
        let eq = gw_equivalents(&w).unwrap();
        assert_eq!(eq.tau, Num::one());
        assert_eq!(eq.theta_i(1), Num::Exact(rat(1, 2)));
    }

    #[test]
    fn tilting_leaves_theta_unchanged() {
        let w = WeightSequence::from_pairs(&[(0, 1, 1), (1, 3, 1), (3, 2, 7)]).unwrap();
        let base = gw_equivalents(&w).unwrap();
        let tilted = gw_equivalents(&w.tilt(&rat(5, 3), &rat(2, 7)).unwrap()).unwrap();
        for i in 0..4 {
            assert!((base.theta_i(i).to_f64() - tilted.theta_i(i).to_f64()).abs() < 1e-12);
        }
        assert!((base.theta_mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subcritical_power_law() {
        let w = WeightSequence::power_law(0.05, 3.5, 4096).unwrap();
        let eq = gw_equivalents(&w).unwrap();
        let nu = eq.nu.to_f64();
        assert!(nu > 0.0 && nu < 1.0);
        assert_eq!(eq.tau.to_f64(), 1.0);
        assert!((eq.theta_mean() - nu).abs() < 1e-3);
        assert!(gw_fringe_cov(&w, &[PlaneTree::cherry()], Regime::Auto).is_err());
        assert!(gw_fringe_cov(&w, &[PlaneTree::cherry()], Regime::SubcriticalAsserted).is_ok());
        assert!(gw_fringe_cov(&w, &[PlaneTree::cherry()], Regime::StableAsserted).is_err());
    }

    #[test]
    fn round_trip_and_errors() {
        for s in ["finite:0=1/1,2=1/1", "ones:64", "inverse-factorial:32", "powerlaw:0.5:2.5:100"] {
            let w: WeightSequence = s.parse().unwrap();
            assert_eq!(w.to_string().parse::<WeightSequence>().unwrap(), w);
        }
        assert_eq!("(1,0,1)".parse::<WeightSequence>().unwrap().to_string(), "finite:0=1/1,2=1/1");
        assert!(matches!("zipf:3".parse::<WeightSequence>(), Err(Error::UnsupportedTail(_))));
        assert!(WeightSequence::from_pairs(&[(0, 1, 1), (1, 1, 1)]).is_err());
        assert!(WeightSequence::from_pairs(&[(1, 1, 1), (2, 1, 1)]).is_err());
    }
}

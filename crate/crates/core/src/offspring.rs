//! Offspring distributions `p` on the non-negative integers with mean at
//! most one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64, Num};

/// Index at which infinite-support families are cut for float quantities.
pub const DEFAULT_TRUNCATION: u32 = 512;

const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum OffspringDistribution {
    /// Finitely supported, exact rational probabilities.
    Finite(BTreeMap<u32, BigRational>),
    /// `p_i = (1 - r) r^i` for all `i >= 0`, exact.
    Geometric { ratio: BigRational },
    /// Poisson law cut at `truncation` and renormalized.
    Poisson { rate: f64, truncation: u32 },
    /// `p_i = c i^(-beta)` for `1 <= i <= truncation`, `p_0` takes the rest.
    PowerLaw { c: f64, beta: f64, truncation: u32 },
}

impl OffspringDistribution {
    pub fn finite(probs: BTreeMap<u32, BigRational>) -> Result<Self> {
        let probs: BTreeMap<u32, BigRational> =
            probs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if probs.values().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total: BigRational = probs.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}",
                format_rational(&total)
            )));
        }
        let d = OffspringDistribution::Finite(probs);
        d.check_mean()?;
        Ok(d)
    }

    pub fn from_pairs(pairs: &[(u32, i64, i64)]) -> Result<Self> {
        let mut m = BTreeMap::new();
        for &(i, num, den) in pairs {
            *m.entry(i).or_insert_with(BigRational::zero) +=
                BigRational::new(BigInt::from(num), BigInt::from(den));
        }
        OffspringDistribution::finite(m)
    }

    /// `(1/2, 0, 1/2)`: the offspring law of full binary trees.
    pub fn full_binary() -> Self {
        OffspringDistribution::from_pairs(&[(0, 1, 2), (2, 1, 2)]).expect("valid")
    }

    pub fn geometric(ratio: BigRational) -> Result<Self> {
        if ratio.is_negative() || ratio >= BigRational::one() {
            return Err(Error::InvalidDistribution("geometric ratio must lie in [0, 1)".into()));
        }
        let d = OffspringDistribution::Geometric { ratio };
        d.check_mean()?;
        Ok(d)
    }

    /// Geometric weights on `0..=max_degree`, renormalized exactly.
    pub fn geometric_truncated(ratio: BigRational, max_degree: u32) -> Result<Self> {
        let mut m = BTreeMap::new();
        let mut w = BigRational::one();
        for i in 0..=max_degree {
            m.insert(i, w.clone());
            w *= &ratio;
        }
        let total: BigRational = m.values().sum();
        for v in m.values_mut() {
            *v /= &total;
        }
        OffspringDistribution::finite(m)
    }

    pub fn poisson(rate: f64, truncation: u32) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidDistribution("Poisson rate must be finite and >= 0".into()));
        }
        let d = OffspringDistribution::Poisson { rate, truncation };
        d.check_mean()?;
        Ok(d)
    }

    pub fn power_law(c: f64, beta: f64, truncation: u32) -> Result<Self> {
        if !(c >= 0.0 && beta > 1.0) {
            return Err(Error::InvalidDistribution("power law needs c >= 0 and beta > 1".into()));
        }
        let mass: f64 = (1..=truncation).map(|i| c * (i as f64).powf(-beta)).sum();
        if mass > 1.0 + FLOAT_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "power-law mass {mass} on positive degrees exceeds 1"
            )));
        }
        let d = OffspringDistribution::PowerLaw { c, beta, truncation };
        d.check_mean()?;
        Ok(d)
    }

    fn check_mean(&self) -> Result<()> {
        let mean = self.mean();
        let too_big = match &mean {
            Num::Exact(m) => *m > BigRational::one(),
            Num::Float(m) => *m > 1.0 + FLOAT_TOLERANCE,
        };
        if too_big {
            return Err(Error::InvalidDistribution(format!("mean {} exceeds 1", mean.render())));
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, OffspringDistribution::Finite(_) | OffspringDistribution::Geometric { .. })
    }

    /// Largest degree with positive probability, `None` for infinite support.
    pub fn max_degree(&self) -> Option<u32> {
        match self {
            OffspringDistribution::Finite(m) => m.keys().next_back().copied(),
            OffspringDistribution::Geometric { ratio } if ratio.is_zero() => Some(0),
            OffspringDistribution::Geometric { .. } => None,
            OffspringDistribution::Poisson { rate, truncation } => {
                Some(if *rate == 0.0 { 0 } else { *truncation })
            }
            OffspringDistribution::PowerLaw { c, truncation, .. } => {
                Some(if *c == 0.0 { 0 } else { *truncation })
            }
        }
    }

    /// `p_i`.
    pub fn p(&self, i: u32) -> Num {
        match self {
            OffspringDistribution::Finite(m) => {
                Num::Exact(m.get(&i).cloned().unwrap_or_else(BigRational::zero))
            }
            OffspringDistribution::Geometric { ratio } => {
                Num::Exact((BigRational::one() - ratio) * num_traits::pow(ratio.clone(), i as usize))
            }
            OffspringDistribution::Poisson { rate, truncation } => {
                if i > *truncation {
                    return Num::Float(0.0);
                }
                let norm: f64 = (0..=*truncation).map(|j| poisson_term(*rate, j)).sum();
                Num::Float(poisson_term(*rate, i) / norm)
            }
            OffspringDistribution::PowerLaw { c, beta, truncation } => {
                if i > *truncation {
                    Num::Float(0.0)
                } else if i == 0 {
                    let mass: f64 = (1..=*truncation).map(|j| c * (j as f64).powf(-beta)).sum();
                    Num::Float((1.0 - mass).max(0.0))
                } else {
                    Num::Float(c * (i as f64).powf(-beta))
                }
            }
        }
    }

    pub fn p_f64(&self, i: u32) -> f64 {
        self.p(i).to_f64()
    }

    /// Degrees with positive probability, up to `limit` for infinite support.
    pub fn support(&self, limit: u32) -> Vec<u32> {
        let top = self.max_degree().unwrap_or(limit).min(limit);
        (0..=top).filter(|&i| self.p(i).is_positive()).collect()
    }

    /// Exact finite table, or `IrrationalWeights`.
    pub fn exact_table(&self) -> Result<BTreeMap<u32, BigRational>> {
        match self {
            OffspringDistribution::Finite(m) => Ok(m.clone()),
            OffspringDistribution::Geometric { ratio } if ratio.is_zero() => {
                Ok(BTreeMap::from([(0, BigRational::one())]))
            }
            _ => Err(Error::IrrationalWeights),
        }
    }

    pub fn mean(&self) -> Num {
        match self {
            OffspringDistribution::Finite(m) => Num::Exact(
                m.iter().map(|(&i, p)| p * BigRational::from_integer(BigInt::from(i))).sum(),
            ),
            OffspringDistribution::Geometric { ratio } => {
                Num::Exact(ratio / (BigRational::one() - ratio))
            }
            _ => {
                let top = self.max_degree().unwrap_or(0);
                Num::Float((0..=top).map(|i| i as f64 * self.p_f64(i)).sum())
            }
        }
    }

    pub fn variance(&self) -> Num {
        match self {
            OffspringDistribution::Finite(m) => {
                let mean = self.mean();
                let second: BigRational = m
                    .iter()
                    .map(|(&i, p)| p * BigRational::from_integer(BigInt::from(i as u64 * i as u64)))
                    .sum();
                Num::Exact(second) - &mean * &mean
            }
            OffspringDistribution::Geometric { ratio } => {
                let q = BigRational::one() - ratio;
                Num::Exact(ratio / (&q * &q))
            }
            _ => {
                let top = self.max_degree().unwrap_or(0);
                let m = self.mean().to_f64();
                Num::Float((0..=top).map(|i| (i as f64 - m).powi(2) * self.p_f64(i)).sum())
            }
        }
    }

    pub fn sampler(&self) -> OffspringSampler {
        match self {
            OffspringDistribution::Geometric { ratio } => {
                OffspringSampler::Geometric { ln_ratio: to_f64(ratio).ln() }
            }
            _ => {
                let top = self.max_degree().unwrap_or(0);
                let mut cdf = Vec::with_capacity(top as usize + 1);
                let mut acc = 0.0;
                for i in 0..=top {
                    acc += self.p_f64(i);
                    cdf.push(acc);
                }
                if let Some(last) = cdf.last_mut() {
                    *last = f64::INFINITY;
                }
                OffspringSampler::Table { cdf }
            }
        }
    }
}

fn poisson_term(rate: f64, i: u32) -> f64 {
    if rate == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=i).map(|k| (k as f64).ln()).sum();
    (i as f64 * rate.ln() - rate - ln_fact).exp()
}

/// Draws iid degrees from an offspring law.
#[derive(Clone, Debug)]
pub enum OffspringSampler {
    Table { cdf: Vec<f64> },
    Geometric { ln_ratio: f64 },
}

impl OffspringSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            OffspringSampler::Table { cdf } => {
                let u: f64 = rng.random();
                cdf.partition_point(|&c| c <= u) as u32
            }
            OffspringSampler::Geometric { ln_ratio } => {
                if *ln_ratio == f64::NEG_INFINITY {
                    return 0;
                }
                let u: f64 = 1.0 - rng.random::<f64>();
                (u.ln() / ln_ratio).floor().min(u32::MAX as f64) as u32
            }
        }
    }
}

impl fmt::Display for OffspringDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffspringDistribution::Finite(m) => {
                f.write_str("finite:")?;
                for (k, (i, p)) in m.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{i}={}", format_rational(p))?;
                }
                Ok(())
            }
            OffspringDistribution::Geometric { ratio } => {
                write!(f, "geometric:{}", format_rational(ratio))
            }
            OffspringDistribution::Poisson { rate, truncation } => {
                write!(f, "poisson:{rate:?}:{truncation}")
            }
            OffspringDistribution::PowerLaw { c, beta, truncation } => {
                write!(f, "powerlaw:{c:?}:{beta:?}:{truncation}")
            }
        }
    }
}

impl FromStr for OffspringDistribution {
    type Err = Error;

    /// Accepts `geometric:R`, `poisson:RATE[:K]`, `powerlaw:C:BETA[:K]`,
    /// `finite:0=1/2,2=1/2`, `binary`, or a JSON object `{"0":"1/2",...}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let raw: BTreeMap<u32, serde_json::Value> = serde_json::from_str(s)
                .map_err(|e| Error::Parse(format!("distribution JSON: {e}")))?;
            let mut m = BTreeMap::new();
            for (i, v) in raw {
                let text = match v {
                    serde_json::Value::String(t) => t,
                    other => other.to_string(),
                };
                m.insert(i, parse_rational(&text)?);
            }
            return OffspringDistribution::finite(m);
        }
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let args: Vec<&str> = parts.collect();
        let float = |t: &str| {
            t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))
        };
        let trunc = |t: Option<&&str>| -> Result<u32> {
            t.map(|t| t.parse().map_err(|_| Error::Parse(format!("bad truncation in {s:?}"))))
                .unwrap_or(Ok(DEFAULT_TRUNCATION))
        };
        match (kind.as_str(), args.len()) {
            ("binary", 0) => Ok(OffspringDistribution::full_binary()),
            ("geometric", 1) => OffspringDistribution::geometric(parse_rational(args[0])?),
            ("poisson", 1 | 2) => OffspringDistribution::poisson(float(args[0])?, trunc(args.get(1))?),
            ("powerlaw", 2 | 3) => {
                OffspringDistribution::power_law(float(args[0])?, float(args[1])?, trunc(args.get(2))?)
            }
            ("finite", 1) => {
                let mut m = BTreeMap::new();
                for entry in args[0].split(',') {
                    let (i, p) = entry
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected i=p in {entry:?}")))?;
                    let i: u32 = i.trim().parse().map_err(|_| Error::Parse(format!("bad degree {i:?}")))?;
                    m.insert(i, parse_rational(p)?);
                }
                OffspringDistribution::finite(m)
            }
            _ => Err(Error::Parse(format!("unknown distribution {s:?}"))),
        }
    }
}

impl Serialize for OffspringDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OffspringDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::String(t) => t,
            other => other.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl OffspringDistribution {
    /// Float copy of `p_0, ..., p_top`.
    pub fn to_f64_table(&self, top: u32) -> Vec<f64> {
        (0..=top).map(|i| self.p(i).to_f64()).collect()
    }
}

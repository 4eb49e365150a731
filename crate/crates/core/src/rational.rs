//! Exact rational helpers and the mixed exact/float scalar used by the
//! asymptotic formulas.
//!
//! Every quantity that only involves finitely many rational probabilities is
//! carried as [`Num::Exact`]; anything touching an irrational input (a Poisson
//! rate, a root found by bisection, a square root that is not a perfect
//! square) degrades to [`Num::Float`]. Mixed arithmetic promotes to float.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact scalar produced by the moment formulas.
pub type MomentValue = BigRational;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `x (x-1) ... (x-q+1)`, with `(x)_0 = 1`.
pub fn falling_factorial(x: &BigRational, q: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = x.clone();
    for _ in 0..q {
        if term.is_zero() {
            return BigRational::zero();
        }
        acc *= &term;
        term -= BigRational::one();
    }
    acc
}

/// Integer falling factorial; zero as soon as `q > x`.
pub fn falling_factorial_u(x: u64, q: u64) -> BigUint {
    if q > x {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for k in 0..q {
        acc *= x - k;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    falling_factorial_u(n, k) / factorial(k)
}

/// Natural logarithm of a positive big integer, accurate to f64 precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational; `-inf` for zero.
pub fn ln_rational(x: &BigRational) -> f64 {
    match x.numer().sign() {
        Sign::NoSign => f64::NEG_INFINITY,
        Sign::Minus => f64::NAN,
        Sign::Plus => {
            ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
        }
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&x.abs()).exp()
}

/// Canonical `"num/den"` rendering (denominator always present).
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"a/b"`, `"a"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Exact square root of a non-negative rational when both parts are squares.
pub fn exact_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// A scalar that is exact while its inputs are.
#[derive(Clone, Debug)]
pub enum Num {
    Exact(BigRational),
    Float(f64),
}

impl Num {
    pub fn zero() -> Self {
        Num::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Num::Exact(BigRational::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Num::Exact(int(v))
    }

    pub fn from_i64(v: i64) -> Self {
        Num::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_zero(),
            Num::Float(f) => *f == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => to_f64(r),
            Num::Float(f) => *f,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Float(_) => None,
        }
    }

    pub fn pow(&self, e: u32) -> Num {
        if e == 0 {
            return Num::one();
        }
        match self {
            Num::Exact(r) => Num::Exact(num_traits::pow(r.clone(), e as usize)),
            Num::Float(f) => Num::Float(f.powi(e as i32)),
        }
    }

    /// `self^(twice_exp / 2)`, exact whenever the power is integral or the
    /// base is a perfect rational square. `0^0 = 1`.
    pub fn half_pow(&self, twice_exp: u32) -> Num {
        if twice_exp % 2 == 0 {
            return self.pow(twice_exp / 2);
        }
        if let Num::Exact(r) = self {
            if let Some(root) = exact_sqrt(r) {
                return Num::Exact(num_traits::pow(root, twice_exp as usize));
            }
        }
        Num::Float(self.to_f64().max(0.0).sqrt().powi(twice_exp as i32))
    }

    pub fn sqrt(&self) -> Num {
        self.half_pow(1)
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_positive(),
            Num::Float(f) => *f > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_negative(),
            Num::Float(f) => *f < 0.0,
        }
    }

    pub fn abs(&self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(r.abs()),
            Num::Float(f) => Num::Float(f.abs()),
        }
    }

    /// `"num/den"` for exact values, shortest round-trip decimal otherwise.
    pub fn render(&self) -> String {
        match self {
            Num::Exact(r) => format_rational(r),
            Num::Float(f) => format!("{f:?}"),
        }
    }
}

impl From<BigRational> for Num {
    fn from(r: BigRational) -> Self {
        Num::Exact(r)
    }
}

impl From<f64> for Num {
    fn from(f: f64) -> Self {
        Num::Float(f)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{r}"),
            Num::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Num::Exact(r) => s.serialize_str(&format_rational(r)),
            Num::Float(f) => s.serialize_f64(*f),
        }
    }
}

macro_rules! num_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    (a, b) => Num::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl<'a> $trait<&'a Num> for Num {
            type Output = Num;
            fn $method(self, rhs: &'a Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    (a, b) => Num::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl<'a> $trait<&'a Num> for &'a Num {
            type Output = Num;
            fn $method(self, rhs: &'a Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    (a, b) => Num::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
    };
}

num_binop!(Add, add, +);
num_binop!(Sub, sub, -);
num_binop!(Mul, mul, *);
num_binop!(Div, div, /);

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Exact(a) => Num::Exact(-a),
            Num::Float(f) => Num::Float(-f),
        }
    }
}

impl std::iter::Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::zero(), |a, b| a + b)
    }
}

/// A [`Num`] extended with the infinities that appear in the limit formulas.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtNum {
    Finite(Num),
    PosInf,
    NegInf,
}

impl ExtNum {
    pub fn finite(&self) -> Option<&Num> {
        match self {
            ExtNum::Finite(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, ExtNum::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtNum::Finite(n) => n.to_f64(),
            ExtNum::PosInf => f64::INFINITY,
            ExtNum::NegInf => f64::NEG_INFINITY,
        }
    }

    /// `self * factor` under the convention `(+-inf) * 0 = 0`.
    pub fn mul_zero_absorbing(&self, factor: &Num) -> Option<Num> {
        match self {
            ExtNum::Finite(n) => Some(n * factor),
            _ if factor.is_zero() => Some(Num::zero()),
            _ => None,
        }
    }

    /// `1 / self` with `1 / inf = 0`.
    pub fn recip(&self) -> Num {
        match self {
            ExtNum::Finite(n) => &Num::one() / n,
            _ => Num::zero(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            ExtNum::Finite(n) => n.render(),
            ExtNum::PosInf => "inf".into(),
            ExtNum::NegInf => "-inf".into(),
        }
    }
}

impl Serialize for ExtNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNum::Finite(n) => n.serialize(s),
            ExtNum::PosInf => s.serialize_str("inf"),
            ExtNum::NegInf => s.serialize_str("-inf"),
        }
    }
}

/// Serde adapter for exact rationals as `"num/den"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

//! Exact arithmetic on p-adic numbers with a finite digit expansion.
//!
//! Every value is stored as `unit * p^valuation` with `p ∤ unit`, so the
//! representable elements are exactly the rationals whose denominator is a
//! power of `p`. This is all that compact open sets, their spectra and their
//! tiling complements ever need, and it keeps every operation exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime, checked by trial division when constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^k`, or `None` on overflow.
    pub fn checked_pow(self, k: u32) -> Option<u64> {
        self.0.checked_pow(k)
    }

    /// `p^k`, panicking on overflow. Only used where the caller has already
    /// bounded the level.
    pub fn pow(self, k: u32) -> u64 {
        self.checked_pow(k)
            .unwrap_or_else(|| panic!("{}^{} overflows u64", self.0, k))
    }

    pub fn big_pow(self, k: u32) -> BigInt {
        num_traits::pow(BigInt::from(self.0), k as usize)
    }

    /// Largest `k` with `p^k <= u64::MAX`.
    pub fn max_level(self) -> u32 {
        let mut k = 0;
        let mut acc: u64 = 1;
        while let Some(next) = acc.checked_mul(self.0) {
            acc = next;
            k += 1;
        }
        k
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `v_p(x)`, with an explicit marker for `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

/// Exponent `e` with `|x - y|_p = p^e`; `NegInfinity` when `x = y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceExponent {
    NegInfinity,
    Finite(i64),
}

/// An element of `Q_p` with finite expansion, `unit * p^valuation`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicRational {
    p: Prime,
    unit: BigInt,
    // zero is stored with valuation 0 and never read
    valuation: i64,
}

impl PAdicRational {
    /// Builds `unit * p^valuation`, moving any factors of `p` out of `unit`.
    pub fn new(p: Prime, unit: impl Into<BigInt>, valuation: i64) -> Self {
        let mut unit = unit.into();
        if unit.is_zero() {
            return Self::zero(p);
        }
        let pb = BigInt::from(p.get());
        let mut valuation = valuation;
        loop {
            let (q, r) = unit.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            unit = q;
            valuation += 1;
        }
        PAdicRational { p, unit, valuation }
    }

    pub fn zero(p: Prime) -> Self {
        PAdicRational { p, unit: BigInt::zero(), valuation: 0 }
    }

    pub fn one(p: Prime) -> Self {
        PAdicRational { p, unit: BigInt::one(), valuation: 0 }
    }

    pub fn from_integer(p: Prime, n: impl Into<BigInt>) -> Self {
        Self::new(p, n, 0)
    }

    /// `p^k`.
    pub fn p_power(p: Prime, k: i64) -> Self {
        PAdicRational { p, unit: BigInt::one(), valuation: k }
    }

    /// `num / den`; fails unless the reduced denominator is a power of `p`.
    pub fn from_ratio(p: Prime, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let num = num.into();
        let den = den.into();
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_zero() { (num, den) } else { (num / &g, den / &g) };
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let pb = BigInt::from(p.get());
        let mut k = 0i64;
        while !den.is_one() {
            let (q, r) = den.div_rem(&pb);
            if !r.is_zero() {
                return Err(Error::invalid(format!(
                    "denominator of {}/{} is not a power of {}",
                    num, den, p
                )));
            }
            den = q;
            k += 1;
        }
        Ok(Self::new(p, num, -k))
    }

    /// The value as `k p^v` for `v` at most the valuation; returns `k`.
    fn unit_at(&self, v: i64) -> BigInt {
        &self.unit * self.p.big_pow((self.valuation - v) as u32)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinity
        } else {
            Valuation::Finite(self.valuation)
        }
    }

    /// `x * p^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        PAdicRational { p: self.p, unit: self.unit.clone(), valuation: self.valuation + k }
    }

    /// `x / y` when the quotient still has a finite expansion.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        self.assert_same_prime(other);
        if other.is_zero() {
            return None;
        }
        let (q, r) = self.unit.div_rem(&other.unit);
        if !r.is_zero() {
            return None;
        }
        Some(Self::new(self.p, q, self.valuation - other.valuation))
    }

    /// The fractional part `{x}`: the digits of `x` at negative positions.
    pub fn fractional_part(&self) -> Self {
        if self.is_zero() || self.valuation >= 0 {
            return Self::zero(self.p);
        }
        let modulus = self.p.big_pow((-self.valuation) as u32);
        Self::new(self.p, self.unit.mod_floor(&modulus), self.valuation)
    }

    /// The digits of `x` strictly below position `m`, i.e. the canonical
    /// representative of the coset `x + p^m Z_p` that has no digit at or above
    /// position `m`.
    pub fn truncate_below(&self, m: i64) -> Self {
        self.shift(-m).fractional_part().shift(m)
    }

    /// Digits at positions `lo..hi`, lowest position first.
    pub fn digits(&self, lo: i64, hi: i64) -> Vec<u64> {
        if hi <= lo {
            return Vec::new();
        }
        let window = &self.truncate_below(hi) - &self.truncate_below(lo);
        let mut n = window
            .shift(-lo)
            .to_integer()
            .expect("window digits are integral");
        let pb = BigInt::from(self.p.get());
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for _ in lo..hi {
            let (q, r) = n.div_mod_floor(&pb);
            out.push(r.to_u64().expect("digit fits"));
            n = q;
        }
        out
    }

    /// The exact integer value, if `x ∈ Z` (valuation ≥ 0).
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.valuation < 0 {
            return None;
        }
        Some(&self.unit * self.p.big_pow(self.valuation as u32))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_integer().and_then(|n| n.to_u64())
    }

    pub fn to_ratio(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let scale = self.p.big_pow(self.valuation.unsigned_abs() as u32);
        if self.valuation >= 0 {
            BigRational::from_integer(&self.unit * scale)
        } else {
            BigRational::new(self.unit.clone(), scale)
        }
    }

    /// `{x}` as an ordinary rational in `[0, 1)`, so that `χ(x) = e^{2πi q}`.
    pub fn character_exponent(&self) -> BigRational {
        self.fractional_part().to_ratio()
    }

    /// The index `k ∈ [0, p^n)` with `χ(x) = e^{2πi k / p^n}`, or `None` when
    /// `{x}` needs a denominator larger than `p^n`.
    pub fn root_index(&self, n: u32) -> Option<u64> {
        let frac = self.fractional_part();
        if frac.is_zero() {
            return Some(0);
        }
        let depth = -frac.valuation;
        if depth > n as i64 {
            return None;
        }
        (frac.unit * self.p.big_pow((n as i64 + frac.valuation) as u32)).to_u64()
    }

    /// Number of negative digit positions that `{x}` occupies (0 on `Z_p`).
    pub fn fractional_depth(&self) -> u32 {
        match self.valuation() {
            Valuation::Finite(v) if v < 0 => (-v) as u32,
            _ => 0,
        }
    }

    pub fn distance(&self, other: &Self) -> DistanceExponent {
        match (self - other).valuation() {
            Valuation::Infinity => DistanceExponent::NegInfinity,
            Valuation::Finite(v) => DistanceExponent::Finite(-v),
        }
    }

    /// Rational rendering, e.g. `3/4`, `-2`, `0`.
    pub fn to_ratio_string(&self) -> String {
        let r = self.to_ratio();
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    /// Parses `INT`, `INT/INT` or `INT*p^INT` (the base may also be written as
    /// the number `p` itself).
    pub fn parse_literal(p: Prime, text: &str) -> Result<Self> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("malformed p-adic literal `{}`", text));
        if let Some((unit, power)) = text.split_once('*') {
            let (base, exp) = power.split_once('^').ok_or_else(bad)?;
            if base != "p" && base.parse::<u64>().ok() != Some(p.get()) {
                return Err(Error::invalid(format!("base `{}` is not p = {}", base, p)));
            }
            let unit: BigInt = unit.parse().map_err(|_| bad())?;
            let exp: i64 = exp.parse().map_err(|_| bad())?;
            return Ok(Self::new(p, unit, exp));
        }
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.parse().map_err(|_| bad())?;
            let den: BigInt = den.parse().map_err(|_| bad())?;
            return Self::from_ratio(p, num, den);
        }
        let n: BigInt = text.parse().map_err(|_| bad())?;
        Ok(Self::from_integer(p, n))
    }

    pub fn to_json(&self) -> PAdicJson {
        PAdicJson {
            unit: self.unit.to_string(),
            valuation: self.valuation().finite(),
        }
    }

    pub fn from_json(p: Prime, json: &PAdicJson) -> Result<Self> {
        let unit: BigInt = json
            .unit
            .parse()
            .map_err(|_| Error::invalid(format!("bad unit `{}`", json.unit)))?;
        match (unit.is_zero(), json.valuation) {
            (true, None) => Ok(Self::zero(p)),
            (false, Some(v)) => {
                if (&unit % BigInt::from(p.get())).is_zero() {
                    return Err(Error::NotUnit(unit.to_string()));
                }
                Ok(PAdicRational { p, unit, valuation: v })
            }
            _ => Err(Error::invalid("zero must have a null valuation and vice versa")),
        }
    }

    fn assert_same_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "p-adic operands over different primes");
    }
}

/// JSON form `{unit, valuation}`; zero has `valuation: null`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PAdicJson {
    pub unit: String,
    pub valuation: Option<i64>,
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}*p^{}", self.unit, self.valuation)
        }
    }
}

impl PartialOrd for PAdicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by prime, then by the ordinary rational value.
impl Ord for PAdicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p
            .cmp(&other.p)
            .then_with(|| self.to_ratio().cmp(&other.to_ratio()))
    }
}

impl<'a> Add<&'a PAdicRational> for &'a PAdicRational {
    type Output = PAdicRational;

    fn add(self, rhs: &PAdicRational) -> PAdicRational {
        self.assert_same_prime(rhs);
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let v = self.valuation.min(rhs.valuation);
        PAdicRational::new(self.p, self.unit_at(v) + rhs.unit_at(v), v)
    }
}

impl<'a> Sub<&'a PAdicRational> for &'a PAdicRational {
    type Output = PAdicRational;

    fn sub(self, rhs: &PAdicRational) -> PAdicRational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a PAdicRational> for &'a PAdicRational {
    type Output = PAdicRational;

    fn mul(self, rhs: &PAdicRational) -> PAdicRational {
        self.assert_same_prime(rhs);
        if self.is_zero() || rhs.is_zero() {
            return PAdicRational::zero(self.p);
        }
        PAdicRational {
            p: self.p,
            unit: &self.unit * &rhs.unit,
            valuation: self.valuation + rhs.valuation,
        }
    }
}

impl Neg for &PAdicRational {
    type Output = PAdicRational;

    fn neg(self) -> PAdicRational {
        PAdicRational { p: self.p, unit: -&self.unit, valuation: self.valuation }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<PAdicRational> for PAdicRational {
            type Output = PAdicRational;
            fn $m(self, rhs: PAdicRational) -> PAdicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PAdicRational {
    type Output = PAdicRational;

    fn neg(self) -> PAdicRational {
        -&self
    }
}

/// The closed ball `B(center, p^radius_exponent)`.
///
/// The center is stored as the canonical coset representative, so two balls
/// of equal radius compare equal exactly when they are the same set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ball {
    center: PAdicRational,
    radius_exponent: i64,
}

impl Ball {
    pub fn new(center: PAdicRational, radius_exponent: i64) -> Self {
        let center = center.truncate_below(-radius_exponent);
        Ball { center, radius_exponent }
    }

    /// `a + p^k Z_p`, i.e. `B(a, p^{-k})`.
    pub fn coset(a: PAdicRational, k: i64) -> Self {
        Ball::new(a, -k)
    }

    pub fn center(&self) -> &PAdicRational {
        &self.center
    }

    pub fn radius_exponent(&self) -> i64 {
        self.radius_exponent
    }

    pub fn contains(&self, x: &PAdicRational) -> bool {
        match x.distance(&self.center) {
            DistanceExponent::NegInfinity => true,
            DistanceExponent::Finite(e) => e <= self.radius_exponent,
        }
    }

    /// Balls in an ultrametric space are nested or disjoint.
    pub fn is_disjoint(&self, other: &Ball) -> bool {
        let (small, big) = if self.radius_exponent <= other.radius_exponent {
            (self, other)
        } else {
            (other, self)
        };
        !big.contains(&small.center)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + p^{} Z", self.center.to_ratio_string(), -self.radius_exponent)
    }
}

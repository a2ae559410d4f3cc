//! Integer combinations of `p^n`-th roots of unity.
//!
//! An element `Σ_e a_e ω^e` with `ω = e^{2πi/p^n}` is stored as its sparse
//! coefficient vector over `Z/p^nZ`. Vanishing is decided with the fiber
//! criterion: the coefficient vector must be constant along every fiber
//! `{r + j p^{n-1} : 0 ≤ j < p}`. No floating point is involved anywhere.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{PAdicRational, Prime};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    p: Prime,
    n: u32,
    modulus: u64,
    coeffs: BTreeMap<u64, BigInt>,
}

impl GroupRingElement {
    pub fn zero(p: Prime, n: u32) -> Self {
        GroupRingElement { p, n, modulus: p.pow(n), coeffs: BTreeMap::new() }
    }

    /// `Σ ω^e` over a multiset of exponents, reduced mod `p^n`.
    pub fn from_exponents<I>(p: Prime, n: u32, exponents: I) -> Self
    where
        I: IntoIterator<Item = i64>,
    {
        let mut z = Self::zero(p, n);
        for e in exponents {
            let e = z.reduce(e);
            z.bump(e, &BigInt::one());
        }
        z
    }

    pub fn from_coeffs<I, C>(p: Prime, n: u32, coeffs: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut z = Self::zero(p, n);
        for (e, c) in coeffs {
            let e = z.reduce(e);
            z.bump(e, &c.into());
        }
        z
    }

    /// `Σ_j χ(x_j)` for p-adic rationals `x_j`, at the smallest level that
    /// holds every term.
    pub fn character_sum<'a, I>(p: Prime, values: I) -> Self
    where
        I: IntoIterator<Item = &'a PAdicRational>,
    {
        let values: Vec<&PAdicRational> = values.into_iter().collect();
        let n = values.iter().map(|x| x.fractional_depth()).max().unwrap_or(0);
        Self::character_sum_at(p, n, values)
    }

    /// Same as [`character_sum`](Self::character_sum) at a fixed level `n`.
    ///
    /// Panics if some `{x_j}` needs a denominator beyond `p^n`.
    pub fn character_sum_at<'a, I>(p: Prime, n: u32, values: I) -> Self
    where
        I: IntoIterator<Item = &'a PAdicRational>,
    {
        let mut z = Self::zero(p, n);
        for x in values {
            let e = x
                .root_index(n)
                .unwrap_or_else(|| panic!("χ({}) is not a p^{}-th root of unity", x, n));
            z.bump(e, &BigInt::one());
        }
        z
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeff(&self, e: u64) -> BigInt {
        self.coeffs.get(&(e % self.modulus)).cloned().unwrap_or_default()
    }

    /// Nonzero coefficients, sorted by exponent.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigInt)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn support(&self) -> Vec<u64> {
        self.coeffs.keys().copied().collect()
    }

    /// Exact vanishing test via the fiber criterion.
    pub fn is_zero(&self) -> bool {
        if self.n == 0 {
            return self.coeffs.is_empty();
        }
        let step = self.modulus / self.p.get();
        let mut fibers: BTreeMap<u64, (u64, &BigInt)> = BTreeMap::new();
        for (e, c) in &self.coeffs {
            let entry = fibers.entry(e % step).or_insert((0, c));
            if entry.1 != c {
                return false;
            }
            entry.0 += 1;
        }
        fibers.values().all(|(count, _)| *count == self.p.get())
    }

    /// Re-expresses the element at level `m ≥ n` (`ω_{p^n} = ω_{p^m}^{p^{m-n}}`).
    pub fn lift(&self, m: u32) -> Self {
        assert!(m >= self.n, "cannot lift from level {} down to {}", self.n, m);
        let factor = self.p.pow(m - self.n);
        let mut z = Self::zero(self.p, m);
        for (e, c) in &self.coeffs {
            z.bump(e * factor, c);
        }
        z
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut z = self.clone();
        for (e, c) in &other.coeffs {
            z.bump(*e, c);
        }
        Ok(z)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut z = Self::zero(self.p, self.n);
        if k.is_zero() {
            return z;
        }
        z.coeffs = self.coeffs.iter().map(|(e, c)| (*e, c * k)).collect();
        z
    }

    /// Adds `k * ω^e`.
    pub fn add_term(&mut self, e: i64, k: impl Into<BigInt>) {
        let e = self.reduce(e);
        self.bump(e, &k.into());
    }

    /// Group-ring product: exponents add mod `p^n`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut z = Self::zero(self.p, self.n);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                let e = ((*e1 as u128 + *e2 as u128) % self.modulus as u128) as u64;
                z.bump(e, &(c1 * c2));
            }
        }
        Ok(z)
    }

    /// Complex conjugate: exponents negate mod `p^n`.
    pub fn conj(&self) -> Self {
        let mut z = Self::zero(self.p, self.n);
        for (e, c) in &self.coeffs {
            z.bump((self.modulus - e) % self.modulus, c);
        }
        z
    }

    /// `z * conj(z)`, which represents `|z|²`.
    pub fn norm_squared(&self) -> Self {
        self.mul(&self.conj()).expect("same level")
    }

    /// Multiplies every exponent by a unit `x` (a Galois automorphism).
    pub fn rotate(&self, x_unit: i64) -> Result<Self> {
        if x_unit.rem_euclid(self.p.get() as i64) == 0 {
            return Err(Error::NotUnit(x_unit.to_string()));
        }
        let x = x_unit.rem_euclid(self.modulus.max(1) as i64) as u128;
        let mut z = Self::zero(self.p, self.n);
        for (e, c) in &self.coeffs {
            z.bump(((*e as u128 * x) % self.modulus as u128) as u64, c);
        }
        Ok(z)
    }

    /// Splits a vanishing 0/1 combination into `♯support / p` disjoint
    /// vanishing blocks of `p` exponents each, one per occupied fiber.
    pub fn decompose_zero_sum(&self) -> Result<Vec<Vec<u64>>> {
        if self.coeffs.values().any(|c| !c.is_one()) {
            return Err(Error::NotZeroSum(format!("{} has coefficients outside {{0,1}}", self)));
        }
        if !self.is_zero() {
            return Err(Error::NotZeroSum(self.to_string()));
        }
        if self.n == 0 {
            return Ok(Vec::new());
        }
        let step = self.modulus / self.p.get();
        let mut remaining: Vec<u64> = self.support();
        let mut blocks = Vec::new();
        while let Some(&first) = remaining.first() {
            let r = first % step;
            let block: Vec<u64> = (0..self.p.get()).map(|j| r + j * step).collect();
            remaining.retain(|e| !block.contains(e));
            blocks.push(block);
        }
        Ok(blocks)
    }

    fn reduce(&self, e: i64) -> u64 {
        e.rem_euclid(self.modulus as i64) as u64
    }

    fn bump(&mut self, e: u64, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_default();
        *slot += k;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.n != other.n {
            return Err(Error::IncompatibleLevels {
                p1: self.p.get(),
                n1: self.n,
                p2: other.p.get(),
                n2: other.n,
            });
        }
        Ok(())
    }
}

/// Fiber test on a dense count vector of length `p^n`, for hot loops that
/// would otherwise allocate a [`GroupRingElement`] per query.
pub fn dense_is_zero(p: u64, counts: &[i64]) -> bool {
    let len = counts.len();
    if len <= 1 {
        return counts.iter().all(|c| *c == 0);
    }
    let step = len / p as usize;
    (0..step).all(|r| {
        let first = counts[r];
        (1..p as usize).all(|j| counts[r + j * step] == first)
    })
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            write!(f, "{}·ω^{}", c.abs(), e)?;
        }
        write!(f, " (ω = e^(2πi/{}))", self.modulus)
    }
}

struct CoeffPairs<'a>(&'a BTreeMap<u64, BigInt>);

impl Serialize for CoeffPairs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (e, c) in self.0 {
            let c: serde_json::Number = c.to_string().parse().map_err(serde::ser::Error::custom)?;
            seq.serialize_element(&(e, c))?;
        }
        seq.end()
    }
}

/// `{p, n, coeffs: [[exponent, coefficient], ...]}` sorted by exponent.
impl Serialize for GroupRingElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GroupRingElement", 3)?;
        st.serialize_field("p", &self.p.get())?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("coeffs", &CoeffPairs(&self.coeffs))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    p: u64,
    n: u32,
    coeffs: Vec<(u64, serde_json::Number)>,
}

impl<'de> Deserialize<'de> for GroupRingElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawElement::deserialize(d)?;
        let p = Prime::new(raw.p).map_err(D::Error::custom)?;
        let modulus = p
            .checked_pow(raw.n)
            .ok_or_else(|| D::Error::custom("level too large"))?;
        let mut z = GroupRingElement::zero(p, raw.n);
        for (e, c) in raw.coeffs {
            if e >= modulus {
                return Err(D::Error::custom(format!("exponent {} out of range", e)));
            }
            let c: BigInt = c.to_string().parse().map_err(D::Error::custom)?;
            z.bump(e, &c);
        }
        Ok(z)
    }
}

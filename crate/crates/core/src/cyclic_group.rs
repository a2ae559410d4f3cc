//! Subsets of the cyclic group `Z/p^γZ`: spectrality, tiling and
//! homogeneity, each decided by a fast structural path and by independent
//! brute-force searches.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::cyclotomic::dense_is_zero;
use crate::error::{Error, Result};
use crate::padic::Prime;
use crate::set_model::PTree;

/// Largest group order accepted by [`DigitSet`].
pub const MAX_GROUP_ORDER: u64 = 1 << 24;

/// A fixed-universe bitset over `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(len: usize, elements: I) -> Self {
        let mut b = Self::new(len);
        for e in elements {
            b.insert(e);
        }
        b
    }

    /// Size of the universe.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {} outside universe of size {}", i, self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// First index not in the set.
    pub fn first_absent(&self) -> Option<usize> {
        (0..self.words.len())
            .find_map(|i| {
                let w = !self.words[i];
                (w != 0).then(|| i * 64 + w.trailing_zeros() as usize)
            })
            .filter(|&i| i < self.len)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// `{(x + t) mod len}`.
    pub fn rotated(&self, t: usize) -> BitSet {
        BitSet::from_elements(self.len, self.iter().map(|x| (x + t) % self.len))
    }
}

/// A nonempty subset `C` of `Z/p^γZ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    p: Prime,
    gamma: u32,
    bits: BitSet,
}

impl DigitSet {
    pub fn new<I: IntoIterator<Item = u64>>(p: Prime, gamma: u32, elements: I) -> Result<Self> {
        let n = p
            .checked_pow(gamma)
            .filter(|&n| n <= MAX_GROUP_ORDER)
            .ok_or_else(|| Error::invalid(format!("Z/{}^{}Z is too large", p, gamma)))?;
        let mut bits = BitSet::new(n as usize);
        for e in elements {
            if e >= n {
                return Err(Error::invalid(format!("{} is not a residue mod {}", e, n)));
            }
            bits.insert(e as usize);
        }
        if bits.is_empty() {
            return Err(Error::invalid("digit set is empty"));
        }
        Ok(DigitSet { p, gamma, bits })
    }

    /// Parses a comma-separated list such as `0,3,4,7`.
    pub fn parse(p: Prime, gamma: u32, text: &str) -> Result<Self> {
        let elements = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map_err(|_| Error::invalid(format!("bad residue `{}`", s))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, gamma, elements)
    }

    pub fn full(p: Prime, gamma: u32) -> Result<Self> {
        Self::new(p, gamma, 0..p.checked_pow(gamma).unwrap_or(u64::MAX).min(MAX_GROUP_ORDER + 1))
    }

    pub fn from_bits(p: Prime, gamma: u32, bits: BitSet) -> Result<Self> {
        if Some(bits.universe() as u64) != p.checked_pow(gamma) {
            return Err(Error::invalid("bitset universe does not match p^gamma"));
        }
        if bits.is_empty() {
            return Err(Error::invalid("digit set is empty"));
        }
        Ok(DigitSet { p, gamma, bits })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// `p^γ`.
    pub fn modulus(&self) -> u64 {
        self.bits.universe() as u64
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: u64) -> bool {
        self.bits.contains(x as usize)
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn elements(&self) -> Vec<u64> {
        self.bits.iter().map(|x| x as u64).collect()
    }

    pub fn tree(&self) -> PTree {
        PTree::from_digits(self.p, self.gamma, &self.elements())
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bits.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for DigitSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements().serialize(s)
    }
}

/// Whether `1̂_C(k) = Σ_{t∈C} e^{-2πi t k / p^γ}` vanishes.
pub fn fourier_vanishes(c: &DigitSet, k: u64) -> bool {
    let n = c.modulus();
    let mut counts = vec![0i64; n as usize];
    for t in c.bits.iter() {
        let e = (n - (t as u64 * k) % n) % n;
        counts[e as usize] += 1;
    }
    dense_is_zero(c.p.get(), &counts)
}

/// `{ℓ ∈ [0, γ) : 1̂_C(p^ℓ) = 0}`.
pub fn fourier_zero_powers(c: &DigitSet) -> BTreeSet<u32> {
    let p = c.p.get();
    (0..c.gamma)
        .filter(|&l| {
            let m = c.p.pow(c.gamma - l);
            let mut counts = vec![0i64; m as usize];
            for t in c.bits.iter() {
                counts[((m - t as u64 % m) % m) as usize] += 1;
            }
            dense_is_zero(p, &counts)
        })
        .collect()
}

/// All `k ≠ 0` with `1̂_C(k) = 0`, each evaluated on its own.
pub fn fourier_zero_set(c: &DigitSet) -> BitSet {
    let n = c.modulus() as usize;
    BitSet::from_elements(n, (1..n).filter(|&k| fourier_vanishes(c, k as u64)))
}

/// Exact-cover search for `T ∋ 0` with `C ⊕ T = Z/p^γZ`.
pub fn brute_force_tile(c: &DigitSet) -> Option<Vec<u64>> {
    let n = c.modulus() as usize;
    if !n.is_multiple_of(c.len()) {
        return None;
    }
    let translates: Vec<BitSet> = (0..n).map(|t| c.bits.rotated(t)).collect();
    let elems: Vec<usize> = c.bits.iter().collect();
    let mut covered = c.bits.clone();
    let mut chosen = vec![0usize];

    fn search(
        n: usize,
        elems: &[usize],
        translates: &[BitSet],
        covered: &mut BitSet,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some(x) = covered.first_absent() else {
            return true;
        };
        for &e in elems {
            let t = (x + n - e) % n;
            if translates[t].is_disjoint(covered) {
                covered.union_with(&translates[t]);
                chosen.push(t);
                if search(n, elems, translates, covered, chosen) {
                    return true;
                }
                chosen.pop();
                covered.difference_with(&translates[t]);
            }
        }
        false
    }

    if search(n, &elems, &translates, &mut covered, &mut chosen) {
        let mut t: Vec<u64> = chosen.into_iter().map(|x| x as u64).collect();
        t.sort_unstable();
        Some(t)
    } else {
        None
    }
}

/// Clique search for a set `Λ ∋ 0` of `♯C` frequencies whose pairwise
/// differences all lie in the zero set of `1̂_C`.
pub fn brute_force_spectrum(c: &DigitSet) -> Option<Vec<u64>> {
    let target = c.len();
    if target == 1 {
        return Some(vec![0]);
    }
    let n = c.modulus() as usize;
    let zeros = fourier_zero_set(c);
    let neighbors: Vec<BitSet> = (0..n).map(|v| zeros.rotated(v)).collect();
    let mut clique = vec![0usize];

    fn extend(target: usize, neighbors: &[BitSet], clique: &mut Vec<usize>, mut cand: BitSet) -> bool {
        if clique.len() == target {
            return true;
        }
        while let Some(v) = cand.first() {
            if clique.len() + cand.count() < target {
                return false;
            }
            cand.remove(v);
            let mut next = cand.clone();
            next.intersect_with(&neighbors[v]);
            clique.push(v);
            if extend(target, neighbors, clique, next) {
                return true;
            }
            clique.pop();
        }
        false
    }

    if extend(target, &neighbors, &mut clique, zeros.clone()) {
        Some(clique.into_iter().map(|x| x as u64).collect())
    } else {
        None
    }
}

/// Exact check that every residue is `c + t` for exactly one pair.
pub fn is_tiling_pair(c: &DigitSet, t: &[u64]) -> bool {
    let n = c.modulus();
    let mut hits = vec![0u32; n as usize];
    for x in c.bits.iter() {
        for &y in t {
            hits[((x as u64 + y) % n) as usize] += 1;
        }
    }
    hits.iter().all(|&h| h == 1)
}

/// Exact check that `Λ` has `♯C` distinct elements with pairwise orthogonal characters on `C`.
pub fn is_spectrum(c: &DigitSet, lambda: &[u64]) -> bool {
    let n = c.modulus();
    let distinct: BTreeSet<u64> = lambda.iter().map(|k| k % n).collect();
    if distinct.len() != c.len() || lambda.len() != c.len() {
        return false;
    }
    let ks: Vec<u64> = distinct.into_iter().collect();
    ks.iter().enumerate().all(|(i, a)| {
        ks[i + 1..].iter().all(|b| fourier_vanishes(c, (a + n - b) % n))
    })
}

/// Frequencies `Σ_{i∈I} b_i p^{γ-i-1}`: the spectrum built from the branching levels.
pub fn spectrum_from_levels(p: Prime, gamma: u32, i_levels: &[u32]) -> Vec<u64> {
    digit_sums(p, &i_levels.iter().map(|&i| gamma - i - 1).collect::<Vec<_>>())
}

/// `Σ_{j∈J} a_j p^j`: the complement built from the non-branching levels.
pub fn complement_from_levels(p: Prime, j_levels: &[u32]) -> Vec<u64> {
    digit_sums(p, j_levels)
}

fn digit_sums(p: Prime, positions: &[u32]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &pos in positions {
        let w = p.pow(pos);
        out = out
            .iter()
            .flat_map(|&x| (0..p.get()).map(move |d| x + d * w))
            .collect();
    }
    out.sort_unstable();
    out
}

/// How each characterization decided.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Routes {
    /// Per-vertex walk of the digit tree.
    pub tree: bool,
    /// Every `♯(C mod p^i)` is a power of p.
    pub count: bool,
    /// `p^{♯zero_powers} ≥ ♯C`.
    pub fourier: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub tile: bool,
    pub spectral: bool,
    pub complement: Option<Vec<u64>>,
    pub spectrum: Option<Vec<u64>>,
}

/// The combined decision for one digit set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub p: u64,
    pub gamma: u32,
    pub set: DigitSet,
    pub spectral: bool,
    pub tile: bool,
    pub homogeneous: bool,
    pub zero_powers: Vec<u32>,
    #[serde(rename = "I")]
    pub i: Option<Vec<u32>>,
    #[serde(rename = "J")]
    pub j: Option<Vec<u32>>,
    /// Frequencies `k`, standing for the characters `x ↦ e^{2πikx/p^γ}`.
    pub spectrum: Option<Vec<u64>>,
    pub complement: Option<Vec<u64>>,
    pub routes: Routes,
    pub oracle: Option<OracleResult>,
    /// Fast-path witnesses pass the exact checks.
    pub witnesses_valid: bool,
    pub consistent: bool,
}

impl Verdict {
    /// Panics with a JSON dump when the characterizations disagree.
    pub fn assert_consistent(&self) {
        if !self.consistent {
            panic!(
                "characterizations disagree: {}",
                serde_json::to_string(self).unwrap_or_else(|_| format!("{:?}", self))
            );
        }
    }
}

/// Decides spectrality, tiling and homogeneity of `C`. With `use_oracles`
/// the brute-force searches run as well, and all answers must agree.
pub fn classify(c: &DigitSet, use_oracles: bool) -> Verdict {
    let tree = c.tree();
    let h = tree.homogeneity();
    let zero_powers: Vec<u32> = fourier_zero_powers(c).into_iter().collect();
    let fourier = (c.p.get() as u128).pow(zero_powers.len() as u32) >= c.len() as u128;
    let routes = Routes { tree: h.tree_route, count: h.count_route, fourier };
    let homogeneous = h.homogeneous;
    let (i, j, spectrum, complement) = if homogeneous {
        let spectrum = spectrum_from_levels(c.p, c.gamma, &h.i);
        let complement = complement_from_levels(c.p, &h.j);
        (Some(h.i.clone()), Some(h.j.clone()), Some(spectrum), Some(complement))
    } else {
        (None, None, None, None)
    };
    let witnesses_valid = match (&spectrum, &complement) {
        (Some(s), Some(t)) => is_spectrum(c, s) && is_tiling_pair(c, t),
        _ => true,
    };
    let oracle = use_oracles.then(|| {
        let complement = brute_force_tile(c);
        let spectrum = brute_force_spectrum(c);
        OracleResult { tile: complement.is_some(), spectral: spectrum.is_some(), complement, spectrum }
    });
    let mut consistent = routes.tree == routes.count && routes.tree == routes.fourier && witnesses_valid;
    if let Some(o) = &oracle {
        consistent &= o.tile == homogeneous && o.spectral == homogeneous;
    }
    Verdict {
        p: c.p.get(),
        gamma: c.gamma,
        set: c.clone(),
        spectral: homogeneous,
        tile: homogeneous,
        homogeneous,
        zero_powers,
        i,
        j,
        spectrum,
        complement,
        routes,
        oracle,
        witnesses_valid,
        consistent,
    }
}

/// Number of `T_{I,J}`-form subsets of `Z/p^γZ`: `p^{Σ_{j∈J} p^{♯(I∩[0,j))}}`.
pub fn tij_count(p: Prime, gamma: u32, i_levels: &BTreeSet<u32>) -> BigUint {
    let exponent: BigUint = (0..gamma)
        .filter(|j| !i_levels.contains(j))
        .map(|j| BigUint::from(p.get()).pow(i_levels.range(..j).count() as u32))
        .sum();
    let exponent = u32::try_from(exponent).expect("count exponent fits in u32");
    BigUint::from(p.get()).pow(exponent)
}

/// The `T_{I,J}`-form set induced by a digit-choice function: at levels in
/// `I` every digit is taken, at other levels `choice(level, prefix) mod p`.
pub fn tij_set<F>(p: Prime, gamma: u32, i_levels: &BTreeSet<u32>, choice: F) -> Result<DigitSet>
where
    F: Fn(u32, &[u64]) -> u64,
{
    let mut prefixes: Vec<Vec<u64>> = vec![Vec::new()];
    for n in 0..gamma {
        prefixes = if i_levels.contains(&n) {
            prefixes
                .into_iter()
                .flat_map(|pre| {
                    (0..p.get()).map(move |d| {
                        let mut v = pre.clone();
                        v.push(d);
                        v
                    })
                })
                .collect()
        } else {
            prefixes
                .into_iter()
                .map(|mut pre| {
                    let d = choice(n, &pre) % p.get();
                    pre.push(d);
                    pre
                })
                .collect()
        };
    }
    DigitSet::new(p, gamma, prefixes.iter().map(|digits| digits_value(p, digits)))
}

fn digits_value(p: Prime, digits: &[u64]) -> u64 {
    digits.iter().rev().fold(0, |acc, d| acc * p.get() + d)
}

/// Streams every `T_{I,J}`-form set once.
///
/// The free parameters are one digit per (level `j ∉ I`, digits at the
/// `I`-levels below `j`); the stream walks them as an odometer, first slot
/// fastest. Every parameter vector gives a different set.
pub struct TijEnumerator {
    p: Prime,
    gamma: u32,
    i_levels: BTreeSet<u32>,
    /// Start index into `slots` of each level's block (levels in `I` have none).
    offsets: Vec<Option<usize>>,
    slots: Vec<u64>,
    done: bool,
}

impl TijEnumerator {
    pub fn new(p: Prime, gamma: u32, i_levels: &BTreeSet<u32>) -> Result<Self> {
        if let Some(&bad) = i_levels.iter().find(|&&i| i >= gamma) {
            return Err(Error::invalid(format!("level {} is outside [0, {})", bad, gamma)));
        }
        p.checked_pow(gamma)
            .filter(|&n| n <= MAX_GROUP_ORDER)
            .ok_or_else(|| Error::invalid("group too large"))?;
        let mut offsets = Vec::with_capacity(gamma as usize);
        let mut total = 0usize;
        for n in 0..gamma {
            if i_levels.contains(&n) {
                offsets.push(None);
            } else {
                offsets.push(Some(total));
                total += p.pow(i_levels.range(..n).count() as u32) as usize;
            }
        }
        Ok(TijEnumerator {
            p,
            gamma,
            i_levels: i_levels.clone(),
            offsets,
            slots: vec![0; total],
            done: false,
        })
    }

    fn current(&self) -> DigitSet {
        let p = self.p.get();
        let free = self.i_levels.len() as u32;
        let mut elements = Vec::with_capacity(p.pow(free) as usize);
        for combo in 0..p.pow(free) {
            let mut rest = combo;
            let mut value = 0u64;
            let mut weight = 1u64;
            // index of the I-digits seen so far, lowest level first
            let mut prefix_index = 0u64;
            let mut prefix_weight = 1u64;
            for n in 0..self.gamma {
                let d = match self.offsets[n as usize] {
                    None => {
                        let d = rest % p;
                        rest /= p;
                        prefix_index += d * prefix_weight;
                        prefix_weight *= p;
                        d
                    }
                    Some(off) => self.slots[off + prefix_index as usize],
                };
                value += d * weight;
                weight *= p;
            }
            elements.push(value);
        }
        DigitSet::new(self.p, self.gamma, elements).expect("elements are residues")
    }
}

impl Iterator for TijEnumerator {
    type Item = DigitSet;

    fn next(&mut self) -> Option<DigitSet> {
        if self.done {
            return None;
        }
        let out = self.current();
        let p = self.p.get();
        let mut carry = true;
        for s in self.slots.iter_mut() {
            *s += 1;
            if *s < p {
                carry = false;
                break;
            }
            *s = 0;
        }
        self.done = carry;
        Some(out)
    }
}

/// Every `T_{I,J}`-form set for the given `I`.
pub fn enumerate_tij(p: Prime, gamma: u32, i_levels: &BTreeSet<u32>) -> Result<TijEnumerator> {
    TijEnumerator::new(p, gamma, i_levels)
}

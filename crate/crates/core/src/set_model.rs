//! Compact open subsets of `Q_p`, their digit trees and p-homogeneity.
//!
//! A set is stored in normalized form `Ω = a + p^s Ω₀` where
//! `Ω₀ = ⊔_{c∈C} (c + p^γ Z_p)`, `0 ∈ C` and `γ` is minimal. The offset `a`
//! and scale `s` make the original set recoverable exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::cyclotomic::GroupRingElement;
use crate::error::{Error, Result};
use crate::padic::{Ball, PAdicRational, Prime, Valuation};

/// Largest number of level-`K` residues a ball union may refine into.
pub const MAX_RESIDUES: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompactOpenSet {
    p: Prime,
    scale: i64,
    offset: PAdicRational,
    gamma: u32,
    digits: Vec<u64>,
}

impl CompactOpenSet {
    /// Parses the set DSL, e.g. `p=2; {1 + 2^3 Z, 4 + 2^3 Z}`.
    pub fn parse(text: &str) -> Result<Self> {
        let (p, balls) = parse_program(text)?;
        Self::from_balls(p, &balls)
    }

    /// Normalizes a nonempty finite union of balls.
    pub fn from_balls(p: Prime, balls: &[Ball]) -> Result<Self> {
        normalize(p, balls)
    }

    /// `⊔_{c∈C} (c + p^γ Z_p)`, normalized.
    pub fn from_digits(p: Prime, gamma: u32, digits: &[u64]) -> Result<Self> {
        let balls: Vec<Ball> = digits
            .iter()
            .map(|&c| Ball::coset(PAdicRational::from_integer(p, c), gamma as i64))
            .collect();
        Self::from_balls(p, &balls)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// The scale exponent `s`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// The offset `a`.
    pub fn offset(&self) -> &PAdicRational {
        &self.offset
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// The core digit set `C`, sorted, always containing 0.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// True when `Ω = Ω₀`, i.e. no scale or offset is applied.
    pub fn is_core(&self) -> bool {
        self.scale == 0 && self.offset.is_zero()
    }

    /// The set with offset and scale removed.
    pub fn core(&self) -> CompactOpenSet {
        CompactOpenSet {
            p: self.p,
            scale: 0,
            offset: PAdicRational::zero(self.p),
            gamma: self.gamma,
            digits: self.digits.clone(),
        }
    }

    /// Ball centers `a + p^s c` in the original coordinates.
    pub fn centers(&self) -> Vec<PAdicRational> {
        self.digits
            .iter()
            .map(|&c| &self.offset + &PAdicRational::from_integer(self.p, c).shift(self.scale))
            .collect()
    }

    /// The disjoint balls `a + p^s c + p^{γ+s} Z_p`.
    pub fn balls(&self) -> Vec<Ball> {
        let k = self.gamma as i64 + self.scale;
        self.centers().into_iter().map(|c| Ball::coset(c, k)).collect()
    }

    pub fn contains(&self, x: &PAdicRational) -> bool {
        self.balls().iter().any(|b| b.contains(x))
    }

    /// Renders the set back into the DSL.
    pub fn to_dsl(&self) -> String {
        let k = self.gamma as i64 + self.scale;
        let terms: Vec<String> = self
            .centers()
            .iter()
            .map(|c| format!("{} + p^{} Z", c.to_ratio_string(), k))
            .collect();
        format!("p={}; {{{}}}", self.p, terms.join(", "))
    }

    pub fn tree(&self) -> PTree {
        PTree::from_digits(self.p, self.gamma, &self.digits)
    }

    /// Homogeneity of the digit tree, in core coordinates.
    pub fn homogeneity(&self) -> Homogeneity {
        self.tree().homogeneity()
    }

    pub fn is_p_homogeneous(&self) -> bool {
        self.homogeneity().homogeneous
    }

    /// Branching levels `(I, J)` in original coordinates (shifted by `s`),
    /// or `None` if the set is not p-homogeneous.
    pub fn branching_levels(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let h = self.homogeneity();
        if !h.homogeneous {
            return None;
        }
        let shift = |v: &[u32]| v.iter().map(|&i| i as i64 + self.scale).collect();
        Some((shift(&h.i), shift(&h.j)))
    }

    /// `I_Ω`: the valuations realized by pairs of distinct points.
    pub fn admissible_orders(&self) -> AdmissibleOrders {
        let tree = self.tree();
        let finite = (0..self.gamma)
            .filter(|&n| tree.branching(n).iter().any(|&b| b > 1))
            .map(|n| n as i64 + self.scale)
            .collect();
        AdmissibleOrders { finite, tail: self.gamma as i64 + self.scale }
    }

    /// Haar measure `♯C · p^{-(γ+s)}`.
    pub fn haar_measure(&self) -> BigRational {
        let count = BigRational::from_integer(BigInt::from(self.digits.len()));
        count * p_power_ratio(self.p, -(self.gamma as i64 + self.scale))
    }

    /// `1̂_Ω(ξ) = p^{-(γ+s)} 1_{B(0, p^{γ+s})}(ξ) Σ_c χ(-c ξ)`, the sum running
    /// over the ball centers in original coordinates.
    pub fn indicator_fourier(&self, xi: &PAdicRational) -> FourierValue {
        let k = self.gamma as i64 + self.scale;
        let scalar = p_power_ratio(self.p, -k);
        let in_support = match xi.valuation() {
            Valuation::Infinity => true,
            Valuation::Finite(v) => v >= -k,
        };
        if !in_support {
            return FourierValue { scalar, sum: GroupRingElement::zero(self.p, 0), in_support };
        }
        let terms: Vec<PAdicRational> = self.centers().iter().map(|c| -(c * xi)).collect();
        let sum = GroupRingElement::character_sum(self.p, terms.iter());
        FourierValue { scalar, sum, in_support }
    }

    pub fn analyze(&self) -> Analysis {
        let h = self.homogeneity();
        let shift = |v: &[u32]| v.iter().map(|&i| i as i64 + self.scale).collect::<Vec<_>>();
        Analysis {
            p: self.p.get(),
            gamma: self.gamma,
            digits: self.digits.clone(),
            scale: self.scale,
            offset: self.offset.to_string(),
            homogeneous: h.homogeneous,
            i: if h.homogeneous { shift(&h.i) } else { Vec::new() },
            j: if h.homogeneous { shift(&h.j) } else { Vec::new() },
            i_omega: self.admissible_orders(),
            measure: ratio_string(&self.haar_measure()),
        }
    }
}

impl fmt::Display for CompactOpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

/// Output of the `analyze` operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub p: u64,
    pub gamma: u32,
    pub digits: Vec<u64>,
    pub scale: i64,
    pub offset: String,
    pub homogeneous: bool,
    #[serde(rename = "I")]
    pub i: Vec<i64>,
    #[serde(rename = "J")]
    pub j: Vec<i64>,
    #[serde(rename = "I_Omega")]
    pub i_omega: AdmissibleOrders,
    pub measure: String,
}

/// `I_Ω = finite ∪ {tail, tail + 1, …}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleOrders {
    pub finite: BTreeSet<i64>,
    pub tail: i64,
}

impl AdmissibleOrders {
    pub fn contains(&self, i: i64) -> bool {
        i >= self.tail || self.finite.contains(&i)
    }

    /// `I_Ω ∩ [lo, hi)`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..hi).filter(|&i| self.contains(i)).collect()
    }
}

/// The exact value `scalar · sum` of a Fourier transform, where `sum` is a
/// combination of roots of unity. Outside the support the value is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierValue {
    pub scalar: BigRational,
    pub sum: GroupRingElement,
    pub in_support: bool,
}

impl FourierValue {
    pub fn is_zero(&self) -> bool {
        !self.in_support || self.sum.is_zero()
    }
}

/// Result of the two homogeneity computations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Homogeneity {
    pub homogeneous: bool,
    /// Per-vertex branching is uniform and in `{1, p}` on every level.
    pub tree_route: bool,
    /// Every `♯(C mod p^n)` is a power of `p`.
    pub count_route: bool,
    /// Levels where every vertex has `p` children.
    #[serde(rename = "I")]
    pub i: Vec<u32>,
    /// Levels where every vertex has one child.
    #[serde(rename = "J")]
    pub j: Vec<u32>,
}

impl Homogeneity {
    pub fn routes_agree(&self) -> bool {
        self.tree_route == self.count_route
    }
}

/// The finite tree whose level `n` holds the residues `C mod p^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PTree {
    p: Prime,
    gamma: u32,
    levels: Vec<Vec<u64>>,
}

impl PTree {
    /// Builds the tree of an arbitrary `C ⊆ Z/p^γZ` (not necessarily normalized).
    pub fn from_digits(p: Prime, gamma: u32, digits: &[u64]) -> Self {
        let top = p.pow(gamma);
        let mut levels = Vec::with_capacity(gamma as usize + 1);
        for n in 0..=gamma {
            let m = p.pow(n);
            let level: BTreeSet<u64> = digits.iter().map(|c| (c % top) % m).collect();
            levels.push(level.into_iter().collect());
        }
        PTree { p, gamma, levels }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Vertex residues at level `n`, sorted.
    pub fn level(&self, n: u32) -> &[u64] {
        &self.levels[n as usize]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Children of vertex `x` at level `n < γ`.
    pub fn children(&self, n: u32, x: u64) -> Vec<u64> {
        let m = self.p.pow(n);
        self.levels[n as usize + 1]
            .iter()
            .copied()
            .filter(|y| y % m == x)
            .collect()
    }

    /// Child counts of the level-`n` vertices, in vertex order.
    pub fn branching(&self, n: u32) -> Vec<usize> {
        let m = self.p.pow(n);
        let mut counts: BTreeMap<u64, usize> = self.levels[n as usize].iter().map(|&x| (x, 0)).collect();
        for y in &self.levels[n as usize + 1] {
            *counts.get_mut(&(y % m)).expect("every child has a parent") += 1;
        }
        counts.into_values().collect()
    }

    /// Per-vertex walk: `(I, J)` if every level branches uniformly 1 or p.
    pub fn tree_route(&self) -> Option<(Vec<u32>, Vec<u32>)> {
        let (mut i, mut j) = (Vec::new(), Vec::new());
        for n in 0..self.gamma {
            let b = self.branching(n);
            if b.iter().all(|&x| x == 1) {
                j.push(n);
            } else if b.iter().all(|&x| x as u64 == self.p.get()) {
                i.push(n);
            } else {
                return None;
            }
        }
        Some((i, j))
    }

    /// Counting: `(I, J)` if every `♯(C mod p^n)` is a power of `p`.
    pub fn count_route(&self) -> Option<(Vec<u32>, Vec<u32>)> {
        let sizes = self.level_sizes();
        if !sizes.iter().all(|&s| is_power_of(self.p.get(), s as u64)) {
            return None;
        }
        let (mut i, mut j) = (Vec::new(), Vec::new());
        for n in 0..self.gamma {
            if sizes[n as usize + 1] == sizes[n as usize] {
                j.push(n);
            } else {
                i.push(n);
            }
        }
        Some((i, j))
    }

    pub fn homogeneity(&self) -> Homogeneity {
        let tree = self.tree_route();
        let count = self.count_route();
        let (i, j) = tree.clone().unwrap_or_default();
        Homogeneity {
            homogeneous: tree.is_some(),
            tree_route: tree.is_some(),
            // a count-route witness that differs from the tree walk counts as disagreement
            count_route: count.is_some() && (tree.is_none() || count == tree),
            i,
            j,
        }
    }

    /// Graphviz rendering: one node per vertex, edges parent to child.
    pub fn to_dot(&self) -> String {
        let h = self.homogeneity();
        let mut out = String::new();
        let _ = writeln!(out, "digraph ptree {{");
        let _ = writeln!(out, "  label=\"p={} gamma={} sizes={:?}\";", self.p, self.gamma, self.level_sizes());
        let _ = writeln!(out, "  node [shape=circle];");
        for n in 0..=self.gamma {
            let note = if n == self.gamma {
                "leaves".to_string()
            } else if h.homogeneous && h.i.contains(&n) {
                format!("branch {} (I)", self.p)
            } else if h.homogeneous {
                "branch 1 (J)".to_string()
            } else {
                format!("branching {:?}", self.branching(n))
            };
            let _ = writeln!(out, "  // level {}: {} vertices, {}", n, self.levels[n as usize].len(), note);
            let _ = write!(out, "  {{ rank=same;");
            for x in &self.levels[n as usize] {
                let _ = write!(out, " \"L{}_{}\" [label=\"{}\"];", n, x, x);
            }
            let _ = writeln!(out, " }}");
        }
        for n in 0..self.gamma {
            let m = self.p.pow(n);
            for y in &self.levels[n as usize + 1] {
                let _ = writeln!(out, "  \"L{}_{}\" -> \"L{}_{}\";", n, y % m, n + 1, y);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// `p^k` as an exact rational.
pub fn p_power_ratio(p: Prime, k: i64) -> BigRational {
    let m = p.big_pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(m)
    } else {
        BigRational::new(BigInt::one(), m)
    }
}

/// `num/den`, or just `num` for integers.
pub fn ratio_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn is_power_of(p: u64, mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

fn normalize(p: Prime, balls: &[Ball]) -> Result<CompactOpenSet> {
    if balls.is_empty() {
        return Err(Error::invalid("empty union of balls"));
    }
    let mut level = balls.iter().map(|b| -b.radius_exponent()).max().expect("nonempty");
    let mut residues: BTreeSet<PAdicRational> = BTreeSet::new();
    for b in balls {
        let k = -b.radius_exponent();
        let count = p
            .checked_pow((level - k) as u32)
            .filter(|&c| c <= MAX_RESIDUES)
            .ok_or_else(|| Error::invalid("ball radii differ too much to refine to a common level"))?;
        if residues.len() as u64 + count > MAX_RESIDUES {
            return Err(Error::invalid("too many residues after refinement"));
        }
        let step = PAdicRational::p_power(p, k);
        let mut x = b.center().clone();
        for _ in 0..count {
            residues.insert(x.clone());
            x = &x + &step;
        }
    }
    loop {
        let anchor = choose_anchor(&residues, level);
        let translated: Vec<PAdicRational> =
            residues.iter().map(|r| (r - &anchor).truncate_below(level)).collect();
        let scale = translated
            .iter()
            .filter_map(|t| t.valuation().finite())
            .min()
            .unwrap_or(level)
            .min(level);
        let gamma = u32::try_from(level - scale).expect("scale never exceeds level");
        if gamma > p.max_level() {
            return Err(Error::invalid(format!("level {} is too deep for p = {}", gamma, p)));
        }
        let mut digits: Vec<u64> = translated
            .iter()
            .map(|t| t.shift(-scale).to_u64().expect("translated residues are core digits"))
            .collect();
        digits.sort_unstable();
        if gamma > 0 {
            let m = p.pow(gamma - 1);
            let parents: BTreeSet<u64> = digits.iter().map(|c| c % m).collect();
            if digits.len() as u64 == p.get() * parents.len() as u64 {
                level -= 1;
                residues = residues.iter().map(|r| r.truncate_below(level)).collect();
                continue;
            }
        }
        return Ok(CompactOpenSet { p, scale, offset: anchor, gamma, digits });
    }
}

/// Zero if it is a residue; otherwise the residue of least valuation, ties
/// broken by the lexicographically smallest digit string (lowest digit first).
fn choose_anchor(residues: &BTreeSet<PAdicRational>, level: i64) -> PAdicRational {
    if let Some(z) = residues.iter().find(|r| r.is_zero()) {
        return z.clone();
    }
    let v = residues
        .iter()
        .filter_map(|r| r.valuation().finite())
        .min()
        .expect("nonempty and nonzero");
    residues
        .iter()
        .filter(|r| r.valuation().finite() == Some(v))
        .min_by_key(|r| r.digits(v, level))
        .expect("some residue attains the minimum")
        .clone()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer { chars: text.chars().collect(), pos: 0 }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for c in self.chars.iter().take(pos) {
            if *c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let (line, column) = self.location(pos);
        Error::Syntax { line, column, message: message.into() }
    }

    fn skip_space(&mut self) {
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == '#' {
                while self.pos < self.chars.len() && self.chars[self.pos] != '\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_space();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.error_at(self.pos, format!("expected `{}`, found `{}`", c, x))),
            None => Err(self.error_at(self.pos, format!("expected `{}`, found end of input", c))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// A signed decimal integer; returns its text and start position.
    fn integer(&mut self) -> Result<(String, usize)> {
        self.skip_space();
        let start = self.pos;
        let mut s = String::new();
        if matches!(self.chars.get(self.pos), Some('-') | Some('+')) {
            s.push(self.chars[self.pos]);
            self.pos += 1;
        }
        while let Some(c) = self.chars.get(self.pos).filter(|c| c.is_ascii_digit()) {
            s.push(*c);
            self.pos += 1;
        }
        if s.trim_start_matches(['-', '+']).is_empty() {
            self.pos = start;
            let found = self.chars.get(start).map_or("end of input".to_string(), |c| format!("`{}`", c));
            return Err(self.error_at(start, format!("expected an integer, found {}", found)));
        }
        Ok((s, start))
    }

    fn small_integer(&mut self) -> Result<i64> {
        let (s, start) = self.integer()?;
        s.parse().map_err(|_| self.error_at(start, format!("integer `{}` out of range", s)))
    }

    fn big_integer(&mut self) -> Result<BigInt> {
        let (s, start) = self.integer()?;
        s.parse().map_err(|_| self.error_at(start, format!("bad integer `{}`", s)))
    }

    /// `p` or the number `p` itself.
    fn base(&mut self, p: Prime) -> Result<()> {
        if self.eat('p') {
            return Ok(());
        }
        let (s, start) = self.integer()?;
        if s.parse::<u64>().ok() != Some(p.get()) {
            return Err(self.error_at(start, format!("base `{}` does not match p = {}", s, p)));
        }
        Ok(())
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn parse_program(text: &str) -> Result<(Prime, Vec<Ball>)> {
    let mut lx = Lexer::new(text);
    lx.expect('p')?;
    lx.expect('=')?;
    let (ps, pstart) = lx.integer()?;
    let pv: u64 = ps
        .parse()
        .map_err(|_| lx.error_at(pstart, format!("`{}` is not a valid p", ps)))?;
    let p = Prime::new(pv)?;
    lx.expect(';')?;
    lx.expect('{')?;
    if lx.peek() == Some('}') {
        return Err(lx.error_at(lx.pos, "empty union of balls"));
    }
    let mut balls = Vec::new();
    loop {
        balls.push(parse_term(&mut lx, p)?);
        if lx.eat(',') {
            continue;
        }
        lx.expect('}')?;
        break;
    }
    lx.eat(';');
    if !lx.at_end() {
        return Err(lx.error_at(lx.pos, "unexpected trailing input"));
    }
    Ok((p, balls))
}

/// `literal + p^k Z` or a bare `Z`.
fn parse_term(lx: &mut Lexer, p: Prime) -> Result<Ball> {
    if lx.eat('Z') {
        return Ok(Ball::coset(PAdicRational::zero(p), 0));
    }
    let center = parse_literal(lx, p)?;
    lx.expect('+')?;
    lx.base(p)?;
    lx.expect('^')?;
    let k = lx.small_integer()?;
    lx.expect('Z')?;
    Ok(Ball::coset(center, k))
}

/// `INT`, `INT/INT` or `INT*p^INT`.
fn parse_literal(lx: &mut Lexer, p: Prime) -> Result<PAdicRational> {
    let start = {
        lx.skip_space();
        lx.pos
    };
    let unit = lx.big_integer()?;
    if lx.eat('/') {
        let den = lx.big_integer()?;
        return PAdicRational::from_ratio(p, unit, den).map_err(|e| lx.error_at(start, e.to_string()));
    }
    if lx.eat('*') {
        lx.base(p)?;
        lx.expect('^')?;
        let k = lx.small_integer()?;
        return Ok(PAdicRational::new(p, unit, k));
    }
    Ok(PAdicRational::from_integer(p, unit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn q(p: u64, num: i64, den: i64) -> PAdicRational {
        PAdicRational::from_ratio(pr(p), num, den).unwrap()
    }

    const NINE_DIGITS: [u64; 9] = [0, 4, 8, 9, 13, 17, 18, 22, 26];

    #[test]
    fn parse_two_balls() {
        let s = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        assert_eq!(s.gamma(), 3);
        assert_eq!(s.digits(), &[0, 3]);
        assert_eq!(s.scale(), 0);
        assert_eq!(s.offset(), &PAdicRational::one(pr(2)));
        let balls = s.balls();
        assert!(balls.contains(&Ball::coset(PAdicRational::from_integer(pr(2), 1), 3)));
        assert!(balls.contains(&Ball::coset(PAdicRational::from_integer(pr(2), 4), 3)));
    }

    #[test]
    fn parse_whole_ring() {
        let s = CompactOpenSet::parse("p=3; {0 + 3^0 Z}").unwrap();
        assert_eq!((s.gamma(), s.digits()), (0, &[0u64][..]));
        let t = CompactOpenSet::parse("p=3; {Z}").unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn parse_mixed_radii_refines() {
        let s = CompactOpenSet::parse("p=3; {4 + 3^3 Z, 22 + 3^3 Z, 0 + 3^1 Z}").unwrap();
        let expected = BigRational::new(BigInt::from(2 + 9), BigInt::from(27));
        assert_eq!(s.haar_measure(), expected);
        assert!(s.contains(&PAdicRational::from_integer(pr(3), 6)));
        assert!(s.contains(&PAdicRational::from_integer(pr(3), 22)));
        assert!(!s.contains(&PAdicRational::from_integer(pr(3), 13)));
    }

    #[test]
    fn parse_literal_forms() {
        let s = CompactOpenSet::parse("p=2;\n{ 1/2 + p^1 Z, 3*2^-1 + 2^1 Z }").unwrap();
        // 1/2 + 2Z_2 and 3/2 + 2Z_2 make up 1/2 + Z_2
        assert_eq!(s.gamma(), 0);
        assert_eq!(s.offset(), &q(2, 1, 2));
        assert_eq!(s.haar_measure(), BigRational::one());
    }

    #[test]
    fn syntax_errors_carry_locations() {
        match CompactOpenSet::parse("p=2; {1 + 2^3 Z,\n 4 + 2^3 }") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(CompactOpenSet::parse("p=4; {Z}"), Err(Error::NotPrime(4))));
        assert!(matches!(CompactOpenSet::parse("p=2; {}"), Err(Error::Syntax { .. })));
        assert!(matches!(CompactOpenSet::parse("p=2; {1 + 3^2 Z}"), Err(Error::Syntax { .. })));
        assert!(matches!(CompactOpenSet::parse("p=2; {1/3 + 2^2 Z}"), Err(Error::Syntax { .. })));
        assert!(matches!(CompactOpenSet::parse("p=2; {Z} x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn normalize_examples() {
        let p = pr(2);
        let b = |c: i64, k: i64| Ball::coset(PAdicRational::from_integer(p, c), k);
        let s = CompactOpenSet::from_balls(p, &[b(1, 3), b(4, 3), b(1, 3)]).unwrap();
        assert_eq!((s.digits(), s.offset().to_u64()), (&[0u64, 3][..], Some(1)));
        let whole = CompactOpenSet::from_balls(p, &[b(0, 1), b(1, 1)]).unwrap();
        assert_eq!((whole.gamma(), whole.digits()), (0, &[0u64][..]));
        assert!(whole.is_core());
        // {0,3,4,7} + 8Z_2 is the same set as {0,3} + 4Z_2
        let ex1 = CompactOpenSet::from_digits(p, 3, &[0, 3, 4, 7]).unwrap();
        assert!(ex1.is_core());
        assert_eq!((ex1.gamma(), ex1.digits()), (2, &[0u64, 3][..]));
        let two_balls = CompactOpenSet::from_digits(p, 3, &[0, 3]).unwrap();
        assert_eq!((two_balls.gamma(), two_balls.digits()), (3, &[0u64, 3][..]));
    }

    #[test]
    fn normalize_scales_and_drops_levels() {
        let p = pr(2);
        let s = CompactOpenSet::from_digits(p, 2, &[0, 2]).unwrap();
        assert_eq!((s.scale(), s.gamma(), s.digits()), (1, 0, &[0u64][..]));
        let s = CompactOpenSet::from_digits(p, 4, &[2, 6, 10, 14]).unwrap();
        // 2 + 4Z_2
        assert_eq!((s.scale(), s.gamma(), s.offset().to_u64()), (2, 0, Some(2)));
        let s = CompactOpenSet::from_digits(pr(3), 3, &[0, 9, 18, 1, 10, 19]).unwrap();
        assert_eq!((s.gamma(), s.digits()), (2, &[0u64, 1][..]));
    }

    #[test]
    fn normalize_is_idempotent() {
        let s = CompactOpenSet::parse("p=3; {5 + 3^2 Z, 2/3 + 3^3 Z, 17 + 3^3 Z}").unwrap();
        let again = CompactOpenSet::from_balls(s.prime(), &s.balls()).unwrap();
        assert_eq!(s, again);
        let reparsed = CompactOpenSet::parse(&s.to_dsl()).unwrap();
        assert_eq!(s, reparsed);
    }

    #[test]
    fn tree_level_sizes() {
        let t = PTree::from_digits(pr(2), 3, &[0, 3, 4, 7]);
        assert_eq!(t.level_sizes(), vec![1, 2, 2, 4]);
        let t = PTree::from_digits(pr(5), 0, &[0]);
        assert_eq!(t.level_sizes(), vec![1]);
        let t = PTree::from_digits(pr(3), 3, &NINE_DIGITS);
        assert_eq!(t.level_sizes(), vec![1, 3, 3, 9]);
        assert_eq!(t.children(1, 1), vec![4]);
    }

    #[test]
    fn homogeneity_examples() {
        let h = PTree::from_digits(pr(2), 3, &[0, 3, 4, 7]).homogeneity();
        assert!(h.homogeneous && h.routes_agree());
        assert_eq!((h.i, h.j), (vec![0, 2], vec![1]));
        let two_balls = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        assert_eq!(two_balls.branching_levels(), Some((vec![0], vec![1, 2])));
        let h = PTree::from_digits(pr(2), 2, &[0, 1, 2]).homogeneity();
        assert!(!h.homogeneous && h.routes_agree());
    }

    #[test]
    fn admissible_orders_examples() {
        let two_balls = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        let io = two_balls.admissible_orders();
        assert_eq!((io.finite.iter().copied().collect::<Vec<_>>(), io.tail), (vec![0], 3));
        assert!(io.contains(5) && !io.contains(1) && !io.contains(-1));
        let zp = CompactOpenSet::parse("p=5; {Z}").unwrap().admissible_orders();
        assert!(zp.finite.is_empty() && zp.tail == 0);
        let ex2 = CompactOpenSet::from_digits(pr(3), 3, &NINE_DIGITS).unwrap().admissible_orders();
        assert_eq!((ex2.finite.iter().copied().collect::<Vec<_>>(), ex2.tail), (vec![0], 2));
        assert_eq!(ex2.window(0, 3), vec![0, 2]);
    }

    #[test]
    fn haar_measure_examples() {
        let zp = CompactOpenSet::parse("p=7; {Z}").unwrap();
        assert_eq!(zp.haar_measure(), BigRational::one());
        let two_balls = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        assert_eq!(ratio_string(&two_balls.haar_measure()), "1/4");
        let ex2 = CompactOpenSet::from_digits(pr(3), 3, &NINE_DIGITS).unwrap();
        assert_eq!(ratio_string(&ex2.haar_measure()), "1/3");
        let scaled = CompactOpenSet::parse("p=2; {0 + 2^-2 Z}").unwrap();
        assert_eq!(ratio_string(&scaled.haar_measure()), "4");
    }

    #[test]
    fn indicator_fourier_examples() {
        let two_balls = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        let at0 = two_balls.indicator_fourier(&PAdicRational::zero(pr(2)));
        assert!(at0.in_support);
        assert_eq!(at0.sum.coeff(0), BigInt::from(2));
        assert_eq!(&at0.scalar * BigRational::from_integer(BigInt::from(2)), two_balls.haar_measure());
        assert!(!two_balls.indicator_fourier(&q(2, 1, 16)).in_support);
        assert!(two_balls.indicator_fourier(&q(2, 1, 16)).is_zero());
        assert!(two_balls.indicator_fourier(&q(2, 1, 2)).is_zero());
        assert!(!two_balls.indicator_fourier(&q(2, 1, 4)).is_zero());
    }

    #[test]
    fn dot_output() {
        let dot = PTree::from_digits(pr(3), 3, &NINE_DIGITS).to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("sizes=[1, 3, 3, 9]"));
        assert_eq!(dot.matches("->").count(), 3 + 3 + 9);
    }

    #[test]
    fn analysis_json_shape() {
        let two_balls = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").unwrap();
        let v = serde_json::to_value(two_balls.analyze()).unwrap();
        assert_eq!(v["I"], serde_json::json!([0]));
        assert_eq!(v["J"], serde_json::json!([1, 2]));
        assert_eq!(v["I_Omega"], serde_json::json!({"finite": [0], "tail": 3}));
        assert_eq!(v["measure"], "1/4");
        assert_eq!(v["offset"], "1*p^0");
        assert_eq!(v["homogeneous"], true);
    }
}

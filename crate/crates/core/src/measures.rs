//! Uniform measures on finite sets and truncations of the singular measures
//! built from a partition `I ⊔ J` of the digit positions.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cyclic_group::{spectrum_from_levels, tij_set, DigitSet};
use crate::cyclotomic::{dense_is_zero, GroupRingElement};
use crate::error::{Error, Result};
use crate::padic::{Ball, PAdicRational, Prime, Valuation};
use crate::set_model::CompactOpenSet;

/// `δ_F = (1/♯F) Σ_{c∈F} δ_c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePointMeasure {
    p: Prime,
    points: Vec<PAdicRational>,
}

impl FinitePointMeasure {
    pub fn new(points: Vec<PAdicRational>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::invalid("empty point set"))?;
        let p = first.prime();
        if let Some(x) = points.iter().find(|x| x.prime() != p) {
            return Err(Error::PrimeMismatch(p.get(), x.prime().get()));
        }
        let mut sorted = points;
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("points must be pairwise distinct"));
        }
        Ok(FinitePointMeasure { p, points: sorted })
    }

    pub fn from_integers(p: Prime, points: &[i64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| PAdicRational::from_integer(p, x)).collect())
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn points(&self) -> &[PAdicRational] {
        &self.points
    }

    /// `γ_F = max v_p(c - c')` over distinct pairs.
    pub fn gamma(&self) -> Result<i64> {
        self.admissible_orders()
            .last()
            .copied()
            .ok_or_else(|| Error::invalid("γ_F needs at least two points"))
    }

    /// `I_F`: every valuation `v_p(c - c')` of a distinct pair.
    pub fn admissible_orders(&self) -> BTreeSet<i64> {
        let mut out = BTreeSet::new();
        for (i, x) in self.points.iter().enumerate() {
            for y in &self.points[i + 1..] {
                if let Valuation::Finite(v) = (x - y).valuation() {
                    out.insert(v);
                }
            }
        }
        out
    }

    /// `♯F = p^{♯I_F}`.
    pub fn is_spectral(&self) -> bool {
        (self.p.get() as u128)
            .checked_pow(self.admissible_orders().len() as u32)
            .is_some_and(|n| n == self.points.len() as u128)
    }

    /// `⊔_{c∈F} B(c, p^{-γ₀})`; the balls are disjoint once `γ₀ > γ_F`.
    pub fn fattened(&self, gamma0: i64) -> Result<CompactOpenSet> {
        if let Ok(g) = self.gamma() {
            if gamma0 <= g {
                return Err(Error::invalid(format!("fattening level {} must exceed γ_F = {}", gamma0, g)));
            }
        }
        let balls: Vec<Ball> = self.points.iter().map(|c| Ball::coset(c.clone(), gamma0)).collect();
        CompactOpenSet::from_balls(self.p, &balls)
    }

    /// `δ̂_F(ξ) = (1/♯F) Σ_{c∈F} χ(-cξ)`, exactly.
    pub fn fourier(&self, xi: &PAdicRational) -> MeasureFourier {
        let terms: Vec<PAdicRational> = self.points.iter().map(|c| -(c * xi)).collect();
        MeasureFourier {
            weight: BigRational::new(BigInt::from(1), BigInt::from(self.points.len())),
            sum: GroupRingElement::character_sum(self.p, terms.iter()),
        }
    }
}

/// `weight · sum`, with `sum` a combination of roots of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureFourier {
    pub weight: BigRational,
    pub sum: GroupRingElement,
}

impl MeasureFourier {
    pub fn is_zero(&self) -> bool {
        self.sum.is_zero()
    }
}

pub fn gamma_f(f: &FinitePointMeasure) -> Result<i64> {
    f.gamma()
}

pub fn admissible_orders_f(f: &FinitePointMeasure) -> BTreeSet<i64> {
    f.admissible_orders()
}

pub fn is_spectral_finite(f: &FinitePointMeasure) -> bool {
    f.is_spectral()
}

/// Homogeneity of the fattened set, the set-side form of the spectral test.
pub fn fattened_homogeneous(f: &FinitePointMeasure, gamma0: i64) -> Result<bool> {
    Ok(f.fattened(gamma0)?.is_p_homogeneous())
}

pub fn measure_fourier(f: &FinitePointMeasure, xi: &PAdicRational) -> MeasureFourier {
    f.fourier(xi)
}

/// How the digit at a position `j ∈ J` is chosen from the digits below it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum DigitChoice {
    #[default]
    Zero,
    /// `t_j = t_{j-1}`, and `t_0 = 0` when `0 ∈ J`.
    Repeat,
    /// Explicit `(level, prefix) → digit`; missing entries choose 0.
    Table(BTreeMap<(u32, Vec<u64>), u64>),
}

impl DigitChoice {
    pub fn choose(&self, level: u32, prefix: &[u64]) -> u64 {
        match self {
            DigitChoice::Zero => 0,
            DigitChoice::Repeat => prefix.last().copied().unwrap_or(0),
            DigitChoice::Table(t) => t.get(&(level, prefix.to_vec())).copied().unwrap_or(0),
        }
    }
}

/// Eventually periodic `I ⊂ ℕ` plus a digit choice for `J = ℕ \ I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularMeasureSpec {
    p: Prime,
    preperiod: Vec<bool>,
    period: Vec<bool>,
    choice: DigitChoice,
}

impl SingularMeasureSpec {
    /// Bit strings give membership in `I`, position 0 first (`'1'` = in `I`).
    pub fn new(p: Prime, preperiod: &str, period: &str, choice: DigitChoice) -> Result<Self> {
        let bits = |s: &str| -> Result<Vec<bool>> {
            s.chars()
                .map(|c| match c {
                    '1' => Ok(true),
                    '0' => Ok(false),
                    _ => Err(Error::invalid(format!("bad bit `{}` in `{}`", c, s))),
                })
                .collect()
        };
        let preperiod = bits(preperiod)?;
        let period = bits(period)?;
        if !period.contains(&true) || !period.contains(&false) {
            return Err(Error::invalid("the period must contain both I and J positions"));
        }
        Ok(SingularMeasureSpec { p, preperiod, period, choice })
    }

    /// `p = 2`, `I ≡ {0, 2} mod 3`, repeat choice: `C_3 = {0, 3, 4, 7}`.
    pub fn example1() -> Self {
        Self::new(Prime::new(2).expect("prime"), "", "101", DigitChoice::Repeat).expect("valid preset")
    }

    /// `p = 3`, `I ≡ {0, 2} mod 3`, repeat choice: `C_3 = {0, 4, 8, 9, …, 26}`.
    pub fn example2() -> Self {
        Self::new(Prime::new(3).expect("prime"), "", "101", DigitChoice::Repeat).expect("valid preset")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "example1" => Some(Self::example1()),
            "example2" => Some(Self::example2()),
            _ => None,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn choice(&self) -> &DigitChoice {
        &self.choice
    }

    pub fn in_i(&self, n: u32) -> bool {
        let n = n as usize;
        if n < self.preperiod.len() {
            self.preperiod[n]
        } else {
            self.period[(n - self.preperiod.len()) % self.period.len()]
        }
    }

    /// `I ∩ [0, γ)`.
    pub fn i_levels(&self, gamma: u32) -> BTreeSet<u32> {
        (0..gamma).filter(|&n| self.in_i(n)).collect()
    }

    /// `C_{I_γ, J_γ}` and `Ω_γ = ⊔_c (c + p^γ Z_p)`.
    pub fn truncate(&self, gamma: u32) -> Result<(DigitSet, CompactOpenSet)> {
        let c = tij_set(self.p, gamma, &self.i_levels(gamma), |n, pre| self.choice.choose(n, pre))?;
        let omega = CompactOpenSet::from_digits(self.p, gamma, &c.elements())?;
        Ok((c, omega))
    }

    /// Period length when there is no preperiod, so that `I + k·period = I`.
    pub fn pure_period(&self) -> Option<u32> {
        self.preperiod.is_empty().then_some(self.period.len() as u32)
    }

    pub fn to_json(&self) -> SpecJson {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        let choice = match &self.choice {
            DigitChoice::Zero => ChoiceJson::Named("zero".into()),
            DigitChoice::Repeat => ChoiceJson::Named("repeat".into()),
            DigitChoice::Table(t) => ChoiceJson::Table {
                table: t
                    .iter()
                    .map(|((level, prefix), digit)| TableEntry { level: *level, prefix: prefix.clone(), digit: *digit })
                    .collect(),
            },
        };
        SpecJson { p: self.p.get(), preperiod: bits(&self.preperiod), period: bits(&self.period), choice }
    }

    pub fn from_json(json: &SpecJson) -> Result<Self> {
        let p = Prime::new(json.p)?;
        let choice = match &json.choice {
            ChoiceJson::Named(n) if n == "zero" => DigitChoice::Zero,
            ChoiceJson::Named(n) if n == "repeat" => DigitChoice::Repeat,
            ChoiceJson::Named(n) => return Err(Error::invalid(format!("unknown digit choice `{}`", n))),
            ChoiceJson::Table { table } => {
                let mut map = BTreeMap::new();
                for e in table {
                    if e.digit >= p.get() || e.prefix.len() != e.level as usize {
                        return Err(Error::invalid(format!("bad choice table entry at level {}", e.level)));
                    }
                    map.insert((e.level, e.prefix.clone()), e.digit);
                }
                DigitChoice::Table(map)
            }
        };
        Self::new(p, &json.preperiod, &json.period, choice)
    }
}

/// `{p, preperiod: "bits", period: "bits", choice: "zero" | "repeat" | {table}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub p: u64,
    #[serde(default)]
    pub preperiod: String,
    pub period: String,
    #[serde(default = "default_choice")]
    pub choice: ChoiceJson,
}

fn default_choice() -> ChoiceJson {
    ChoiceJson::Named("zero".into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChoiceJson {
    Named(String),
    Table { table: Vec<TableEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub level: u32,
    pub prefix: Vec<u64>,
    pub digit: u64,
}

pub fn truncate(spec: &SingularMeasureSpec, gamma: u32) -> Result<(DigitSet, CompactOpenSet)> {
    spec.truncate(gamma)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationCheck {
    pub xi: String,
    pub holds: bool,
}

/// Exact record of `Σ_{λ∈Λ_{γ₀}} |1̂_{Ω_γ}(λ-ξ)|² = |Ω_γ|²` over the residues
/// `ξ = k p^{-γ₀}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationCertificate {
    pub p: u64,
    pub gamma0: u32,
    pub gamma: u32,
    pub size: usize,
    pub spectrum: Vec<String>,
    pub verified: bool,
    pub checks: Vec<TruncationCheck>,
}

/// Checks the partial spectrum `Λ_{γ₀} = {Σ_{i∈I, i<γ₀} b_i p^{-i-1}}` against `Ω_γ`.
pub fn verify_truncation_spectrum(spec: &SingularMeasureSpec, gamma0: u32, gamma: u32) -> Result<TruncationCertificate> {
    if gamma < gamma0 {
        return Err(Error::invalid("need γ ≥ γ₀"));
    }
    let (c, _) = spec.truncate(gamma)?;
    truncation_certificate(&c, &spec.i_levels(gamma0), gamma0)
}

/// The same check for an arbitrary digit set `C ⊆ Z/p^γZ` and levels `I ⊆ [0, γ₀)`.
///
/// For `ξ ∈ B(0, p^{γ₀})` and `λ ∈ Λ_{γ₀}` the difference `λ - ξ` has depth
/// at most `γ₀`, so `Σ_c χ(-c(λ-ξ))` only sees `C mod p^{γ₀}` and the sum of
/// squares is a combination of `p^{γ₀}`-th roots of unity.
pub fn truncation_certificate(c: &DigitSet, i_levels: &BTreeSet<u32>, gamma0: u32) -> Result<TruncationCertificate> {
    let p = c.prime();
    if gamma0 > c.gamma() || i_levels.iter().any(|&i| i >= gamma0) {
        return Err(Error::invalid("levels must lie below γ₀ ≤ γ"));
    }
    let n = p.pow(gamma0);
    let levels: Vec<u32> = i_levels.iter().copied().collect();
    let lambda = spectrum_from_levels(p, gamma0, &levels);
    let elements = c.elements();
    let mut diff = vec![0i64; n as usize];
    for &a in &elements {
        for &b in &elements {
            diff[((a % n + n - b % n) % n) as usize] += 1;
        }
    }
    let target = (elements.len() as i64).pow(2);
    let mut checks = Vec::with_capacity(n as usize);
    let mut verified = true;
    let mut total = vec![0i64; n as usize];
    for k in 0..n {
        total.iter_mut().for_each(|x| *x = 0);
        for &l in &lambda {
            let r = (l + n - k) % n;
            for (delta, &count) in diff.iter().enumerate() {
                if count != 0 {
                    total[((delta as u64 * r) % n) as usize] += count;
                }
            }
        }
        total[0] -= target;
        let holds = dense_is_zero(p.get(), &total);
        verified &= holds;
        checks.push(TruncationCheck {
            xi: PAdicRational::new(p, k, -(gamma0 as i64)).to_ratio_string(),
            holds,
        });
    }
    Ok(TruncationCertificate {
        p: p.get(),
        gamma0,
        gamma: c.gamma(),
        size: elements.len(),
        spectrum: lambda
            .iter()
            .map(|&l| PAdicRational::new(p, l, -(gamma0 as i64)).to_ratio_string())
            .collect(),
        verified,
        checks,
    })
}

/// The maps `f_c(x) = p^γ x + c`, `c ∈ C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfsMaps {
    p: Prime,
    gamma: u32,
    digits: Vec<u64>,
}

impl IfsMaps {
    /// The images `f_c(Z_p) = c + p^γ Z_p` are disjoint because `C` has
    /// distinct residues mod `p^γ`.
    pub fn new(c: &DigitSet) -> Self {
        IfsMaps { p: c.prime(), gamma: c.gamma(), digits: c.elements() }
    }

    /// The maps of a truncation of `spec` at level `γ`.
    pub fn from_spec(spec: &SingularMeasureSpec, gamma: u32) -> Result<Self> {
        Ok(Self::new(&spec.truncate(gamma)?.0))
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn apply(&self, c: u64, x: &PAdicRational) -> PAdicRational {
        &x.shift(self.gamma as i64) + &PAdicRational::from_integer(self.p, c)
    }

    /// `{f_{c_1} ∘ ⋯ ∘ f_{c_d}(0)} = {Σ_k c_k p^{(k-1)γ}}`, sorted.
    pub fn orbit(&self, depth: u32) -> Vec<PAdicRational> {
        let mut points = vec![PAdicRational::zero(self.p)];
        for _ in 0..depth {
            points = points
                .iter()
                .flat_map(|x| self.digits.iter().map(move |&c| self.apply(c, x)))
                .collect();
        }
        points.sort();
        points.dedup();
        points
    }
}

pub fn ifs_orbit(maps: &IfsMaps, depth: u32) -> Vec<PAdicRational> {
    maps.orbit(depth)
}

//! Canonical spectra and tiling complements of p-homogeneous compact open
//! sets, exact verification of candidate pairs, and the isometric canonical
//! form of finite homogeneous sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{dense_is_zero, GroupRingElement};
use crate::error::{Error, Result};
use crate::padic::{Ball, PAdicRational, Prime, Valuation};
use crate::set_model::CompactOpenSet;

/// Largest number of residues a verification sweeps.
pub const MAX_RESIDUES: u64 = 1 << 22;

/// `F ⊕ 𝕃_g`, where `𝕃_g = p^{-g}𝕃` holds the elements whose digits all sit
/// below position `-g` and `F ⊆ B(0, p^g)` is finite.
///
/// Every element decomposes uniquely as `f + ℓ`: `ℓ` is the part of the
/// element below position `-g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePeriodicSet {
    p: Prime,
    level: i64,
    finite: Vec<PAdicRational>,
}

impl LatticePeriodicSet {
    /// Checks `F ⊆ B(0, p^g)` and that `F` has no repeated element.
    pub fn new(p: Prime, level: i64, finite: Vec<PAdicRational>) -> Result<Self> {
        if finite.is_empty() {
            return Err(Error::invalid("finite part is empty"));
        }
        for f in &finite {
            if f.prime() != p {
                return Err(Error::PrimeMismatch(p.get(), f.prime().get()));
            }
            if let Valuation::Finite(v) = f.valuation() {
                if v < -level {
                    return Err(Error::invalid(format!(
                        "{} lies outside B(0, p^{})",
                        f.to_ratio_string(),
                        level
                    )));
                }
            }
        }
        let mut sorted = finite;
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("finite part repeats an element, so sums are not unique"));
        }
        Ok(LatticePeriodicSet { p, level, finite: sorted })
    }

    /// `{k / p^γ} ⊕ 𝕃_γ`, the p-adic form of a frequency set in `Z/p^γZ`.
    pub fn from_frequencies(p: Prime, gamma: u32, ks: &[u64]) -> Result<Self> {
        let finite = ks
            .iter()
            .map(|&k| PAdicRational::new(p, k, -(gamma as i64)))
            .collect();
        Self::new(p, gamma as i64, finite)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// The lattice level `g`.
    pub fn level(&self) -> i64 {
        self.level
    }

    /// The finite part `F`, sorted.
    pub fn finite(&self) -> &[PAdicRational] {
        &self.finite
    }

    pub fn contains(&self, x: &PAdicRational) -> bool {
        let low = x.truncate_below(-self.level);
        let high = x - &low;
        self.finite.binary_search(&high).is_ok()
    }

    /// The same set written over the finer lattice `𝕃_{g'}`, `g' ≥ g`.
    pub fn refine(&self, level: i64) -> Result<Self> {
        if level < self.level {
            return Err(Error::invalid("refinement must not lower the lattice level"));
        }
        let mut finite = self.finite.clone();
        for pos in -level..-self.level {
            let step = PAdicRational::p_power(self.p, pos);
            finite = finite
                .iter()
                .flat_map(|f| {
                    let step = step.clone();
                    (0..self.p.get()).map(move |d| f + &(&step * &PAdicRational::from_integer(f.prime(), d)))
                })
                .collect();
        }
        Self::new(self.p, level, finite)
    }

    /// `Λ + t` for `t ∈ B(0, p^g)`.
    pub fn translate(&self, t: &PAdicRational) -> Result<Self> {
        if let Valuation::Finite(v) = t.valuation() {
            if v < -self.level {
                return Err(Error::invalid("translation must lie in B(0, p^g)"));
            }
        }
        Self::new(self.p, self.level, self.finite.iter().map(|f| f + t).collect())
    }

    /// `Λ ∩ B(center, p^r)`, listed explicitly.
    pub fn window(&self, center: &PAdicRational, r: i64) -> Vec<PAdicRational> {
        let mut out = Vec::new();
        for f in &self.finite {
            let y = center - f;
            if r <= self.level {
                let l0 = y.truncate_below(-self.level);
                let lambda = f + &l0;
                if within(&(&lambda - center), r) {
                    out.push(lambda);
                }
            } else {
                let base = y.truncate_below(-r);
                let step = PAdicRational::p_power(self.p, -r);
                let count = self.p.pow((r - self.level) as u32);
                let mut l = base;
                for _ in 0..count {
                    out.push(f + &l);
                    l = &l + &step;
                }
            }
        }
        out.sort();
        out
    }

    /// `♯(Λ ∩ B(center, p^r))` without listing the points.
    pub fn window_count(&self, center: &PAdicRational, r: i64) -> u128 {
        if r > self.level {
            let per = (self.p.get() as u128).saturating_pow((r - self.level) as u32);
            return per.saturating_mul(self.finite.len() as u128);
        }
        self.finite
            .iter()
            .filter(|f| {
                let y = center - *f;
                let lambda_minus_center = &y.truncate_below(-self.level) - &y;
                within(&lambda_minus_center, r)
            })
            .count() as u128
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            p: Some(self.p.get()),
            level: self.level,
            finite: self.finite.iter().map(PAdicRational::to_ratio_string).collect(),
        }
    }

    pub fn from_json(p: Prime, json: &LatticeJson) -> Result<Self> {
        if let Some(q) = json.p {
            if q != p.get() {
                return Err(Error::PrimeMismatch(p.get(), q));
            }
        }
        let finite = json
            .finite
            .iter()
            .map(|s| PAdicRational::parse_literal(p, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, json.level, finite)
    }
}

/// JSON form `{p, level, finite: ["0", "1/2", ...]}`; `finite` entries may
/// use any p-adic literal syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub level: i64,
    pub finite: Vec<String>,
}

fn within(x: &PAdicRational, r: i64) -> bool {
    match x.valuation() {
        Valuation::Infinity => true,
        Valuation::Finite(v) => v >= -r,
    }
}

fn require_homogeneous(omega: &CompactOpenSet) -> Result<(Vec<u32>, Vec<u32>)> {
    let h = omega.homogeneity();
    if !h.homogeneous {
        return Err(Error::NotHomogeneous);
    }
    Ok((h.i, h.j))
}

/// Sums `Σ d_k p^{pos_k}` over all digit choices.
fn digit_sums(p: Prime, positions: &[i64]) -> Vec<PAdicRational> {
    let mut out = vec![PAdicRational::zero(p)];
    for &pos in positions {
        let step = PAdicRational::p_power(p, pos);
        out = out
            .iter()
            .flat_map(|x| {
                let step = step.clone();
                (0..p.get()).map(move |d| x + &(&step * &PAdicRational::from_integer(p, d)))
            })
            .collect();
    }
    out.sort();
    out
}

/// `Λ = Σ_{i∈I} Z/pZ · p^{-i-1} ⊕ 𝕃_γ`, with `I` the branching levels.
/// For `Ω = a + p^s Ω₀` the spectrum is scaled by `p^{-s}`.
pub fn canonical_spectrum(omega: &CompactOpenSet) -> Result<LatticePeriodicSet> {
    let (i, _) = require_homogeneous(omega)?;
    let s = omega.scale();
    let positions: Vec<i64> = i.iter().map(|&i| -(i as i64 + s) - 1).collect();
    LatticePeriodicSet::new(omega.prime(), omega.gamma() as i64 + s, digit_sums(omega.prime(), &positions))
}

/// `T = Σ_{j∈J} Z/pZ · p^j ⊕ 𝕃`, with `J` the non-branching levels.
/// For `Ω = a + p^s Ω₀` the complement is scaled by `p^s`.
pub fn canonical_tiling_complement(omega: &CompactOpenSet) -> Result<LatticePeriodicSet> {
    let (_, j) = require_homogeneous(omega)?;
    let s = omega.scale();
    let positions: Vec<i64> = j.iter().map(|&j| j as i64 + s).collect();
    LatticePeriodicSet::new(omega.prime(), -s, digit_sums(omega.prime(), &positions))
}

/// One residue `ξ` of the spectral check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueCheck {
    /// `ξ` in the coordinates of the original set.
    pub xi: String,
    /// `♯(Λ ∩ B(ξ, p^{γ+s}))`.
    pub window: u64,
    /// Whether `Σ_λ |Σ_c χ(-c(λ-ξ))|² - (♯C)²` vanishes.
    pub holds: bool,
    /// The nonvanishing difference, when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<GroupRingElement>,
}

/// Exact record of `Σ_{λ∈Λ} |1̂_Ω(λ-ξ)|² = |Ω|²` over every residue class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralCertificate {
    pub p: u64,
    pub gamma: u32,
    pub scale: i64,
    pub lattice_level: i64,
    /// Residues `ξ` range over `k·p^{-residue_level-s}`, `0 ≤ k < p^{residue_level}`.
    pub residue_level: u32,
    pub verified: bool,
    pub checks: Vec<ResidueCheck>,
}

/// Exactly verifies that `Λ` is a spectrum of `Ω`.
///
/// Writing `Ω = a + p^s Ω₀`, `Λ` is a spectrum of `Ω` iff `p^s Λ` is one of
/// `Ω₀` (the offset only contributes unimodular phases). With `g` the
/// lattice level of `p^s Λ` and `M = max(g, γ)`,
/// `S(ξ) = Σ_λ |Σ_c χ(-c(λ-ξ))|²` depends only on the digits of `ξ` at
/// positions `[-M, 0)`: shifting `ξ` by `Z_p` changes neither a term nor the
/// window `B(ξ, p^γ)`, and digits below `-M` only move the lattice
/// coordinate of each window point. So the `p^M` residues `k p^{-M}` cover
/// every `ξ ∈ Q_p`.
pub fn verify_spectral_pair(omega: &CompactOpenSet, lambda: &LatticePeriodicSet) -> Result<SpectralCertificate> {
    let p = omega.prime();
    if lambda.prime() != p {
        return Err(Error::PrimeMismatch(p.get(), lambda.prime().get()));
    }
    let s = omega.scale();
    let gamma = omega.gamma();
    let g = lambda.level() - s;
    let big_m = g.max(gamma as i64);
    let m = u32::try_from(big_m).expect("max(g, γ) ≥ 0");
    let residues = p
        .checked_pow(m)
        .filter(|&n| n <= MAX_RESIDUES)
        .ok_or_else(|| Error::invalid(format!("too many residues to check (p^{})", m)))?;
    let n_gamma = p.pow(gamma);
    let digits = omega.digits();
    let diff = difference_counts(digits, n_gamma);
    let target = (digits.len() as i64).pow(2);
    // fractional parts of p^s f, as integers mod p^M
    let phis: Vec<u64> = lambda
        .finite()
        .iter()
        .map(|f| {
            let frac = f.shift(s).fractional_part().shift(big_m);
            frac.to_u64().expect("fractional part fits the residue level")
        })
        .collect();

    let mut checks = Vec::with_capacity(residues as usize);
    let mut verified = true;
    let mut total = vec![0i64; n_gamma as usize];
    for k in 0..residues {
        total.iter_mut().for_each(|x| *x = 0);
        let mut window = 0u64;
        for &phi in &phis {
            let y = (k + residues - phi) % residues;
            if g >= gamma as i64 {
                let drop = p.pow(m - gamma);
                if y % drop == 0 {
                    window += 1;
                    accumulate(&mut total, &diff, y / drop);
                }
            } else {
                let count = p.pow((gamma as i64 - g) as u32);
                for j in 0..count {
                    window += 1;
                    let r = (y + n_gamma - j % n_gamma) % n_gamma;
                    accumulate(&mut total, &diff, r);
                }
            }
        }
        total[0] -= target;
        let holds = dense_is_zero(p.get(), &total);
        verified &= holds;
        let defect = (!holds).then(|| {
            GroupRingElement::from_coeffs(p, gamma, total.iter().enumerate().map(|(e, &c)| (e as i64, c)))
        });
        checks.push(ResidueCheck {
            xi: PAdicRational::new(p, k, -big_m - s).to_ratio_string(),
            window,
            holds,
            defect,
        });
    }
    Ok(SpectralCertificate {
        p: p.get(),
        gamma,
        scale: s,
        lattice_level: lambda.level(),
        residue_level: m,
        verified,
        checks,
    })
}

/// `diff[δ] = ♯{(c, c') : c - c' ≡ δ mod n}`.
fn difference_counts(digits: &[u64], n: u64) -> Vec<i64> {
    let mut diff = vec![0i64; n as usize];
    for &a in digits {
        for &b in digits {
            diff[((a + n - b) % n) as usize] += 1;
        }
    }
    diff
}

/// Adds `|Σ_c ω^{c r}|² = Σ_δ diff[δ] ω^{δ r}`.
fn accumulate(total: &mut [i64], diff: &[i64], r: u64) {
    let n = total.len() as u64;
    for (delta, &count) in diff.iter().enumerate() {
        if count != 0 {
            total[((delta as u64 * r) % n) as usize] += count;
        }
    }
}

/// `S(ξ) · p^{2(γ+s)}` evaluated directly from the window `Λ ∩ B(ξ, p^{γ+s})`
/// for an arbitrary `ξ`, as a combination of roots of unity.
pub fn spectral_sum_at(omega: &CompactOpenSet, lambda: &LatticePeriodicSet, xi: &PAdicRational) -> GroupRingElement {
    let p = omega.prime();
    let centers = omega.centers();
    let parts: Vec<GroupRingElement> = lambda
        .window(xi, omega.gamma() as i64 + omega.scale())
        .iter()
        .map(|l| {
            let d = l - xi;
            let terms: Vec<PAdicRational> = centers.iter().map(|c| -(c * &d)).collect();
            GroupRingElement::character_sum(p, terms.iter()).norm_squared()
        })
        .collect();
    let level = parts.iter().map(GroupRingElement::level).max().unwrap_or(0);
    parts.iter().fold(GroupRingElement::zero(p, level), |acc, z| {
        acc.add(&z.lift(level)).expect("same level")
    })
}

/// One fractional class of the tiling check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCheck {
    /// The common fractional part `{t}` of the class.
    pub fraction: String,
    /// Integer parts of the class reduced mod `p^γ`.
    pub residues: Vec<u64>,
    pub exact_cover: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TilingCertificate {
    pub p: u64,
    pub gamma: u32,
    pub scale: i64,
    pub lattice_level: i64,
    pub verified: bool,
    /// Number of fractional classes a complement needs.
    pub classes_expected: u64,
    pub classes: Vec<ClassCheck>,
}

/// Exactly verifies `Ω ⊕ T = Q_p`.
///
/// After removing the offset and scale, `T = T₀ ⊕ 𝕃_h`. The coset
/// `u + Z_p` (`u ∈ 𝕃`) is reached by the points of `T₀` whose fractional
/// part matches the digits of `u` at positions `[-h, 0)`, so every one of
/// the `p^h` fractional classes of `T₀` must be present, and within each
/// class the integer parts mod `p^γ` must be an exact complement of `C`.
pub fn verify_tiling_pair(omega: &CompactOpenSet, t: &LatticePeriodicSet) -> Result<TilingCertificate> {
    let p = omega.prime();
    if t.prime() != p {
        return Err(Error::PrimeMismatch(p.get(), t.prime().get()));
    }
    let s = omega.scale();
    let gamma = omega.gamma();
    let n = p.pow(gamma);
    let mut h = t.level() + s;
    let mut points: Vec<PAdicRational> = t.finite().iter().map(|x| x.shift(-s)).collect();
    if h < 0 {
        p.checked_pow((-h) as u32)
            .filter(|&e| e.saturating_mul(points.len() as u64) <= MAX_RESIDUES)
            .ok_or_else(|| Error::invalid("complement lattice too coarse to expand"))?;
        let positions: Vec<i64> = (0..-h).collect();
        let sums = digit_sums(p, &positions);
        points = points.iter().flat_map(|x| sums.iter().map(move |d| x + d)).collect();
        h = 0;
    }
    let classes_expected = p
        .checked_pow(h as u32)
        .filter(|&c| c <= MAX_RESIDUES)
        .ok_or_else(|| Error::invalid("complement lattice too fine to check"))?;
    let mut by_class: std::collections::BTreeMap<PAdicRational, Vec<u64>> = Default::default();
    for x in &points {
        let frac = x.fractional_part();
        let int = x - &frac;
        let r = int
            .to_integer()
            .expect("integer part")
            .mod_floor(&BigInt::from(n))
            .to_u64()
            .expect("residue fits");
        by_class.entry(frac).or_default().push(r);
    }
    let digits = omega.digits();
    let mut classes = Vec::with_capacity(by_class.len());
    let mut verified = by_class.len() as u64 == classes_expected;
    for (frac, mut residues) in by_class {
        residues.sort_unstable();
        let exact_cover = exact_cover(digits, &residues, n);
        verified &= exact_cover;
        classes.push(ClassCheck { fraction: frac.to_ratio_string(), residues, exact_cover });
    }
    Ok(TilingCertificate {
        p: p.get(),
        gamma,
        scale: s,
        lattice_level: t.level(),
        verified,
        classes_expected,
        classes,
    })
}

fn exact_cover(c: &[u64], t: &[u64], n: u64) -> bool {
    if (c.len() as u64).saturating_mul(t.len() as u64) != n {
        return false;
    }
    let mut hit = vec![false; n as usize];
    for &a in c {
        for &b in t {
            let x = ((a + b) % n) as usize;
            if hit[x] {
                return false;
            }
            hit[x] = true;
        }
    }
    true
}

/// Admissible orders and homogeneity of a finite set `E ⊂ Q_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteSetProfile {
    pub p: u64,
    pub size: usize,
    /// `I_E = {v_p(x - y) : x ≠ y ∈ E}`.
    pub orders: BTreeSet<i64>,
    /// `♯E = p^{♯I_E}`.
    pub homogeneous: bool,
}

impl DiscreteSetProfile {
    /// `γ_E = max I_E`, absent for singletons.
    pub fn gamma(&self) -> Option<i64> {
        self.orders.iter().next_back().copied()
    }
}

pub fn discrete_profile(e: &[PAdicRational]) -> Result<DiscreteSetProfile> {
    let points = distinct_points(e)?;
    let p = points[0].prime();
    let mut orders = BTreeSet::new();
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            if let Valuation::Finite(v) = (x - y).valuation() {
                orders.insert(v);
            }
        }
    }
    let homogeneous = (p.get() as u128)
        .checked_pow(orders.len() as u32)
        .is_some_and(|n| n == points.len() as u128);
    Ok(DiscreteSetProfile { p: p.get(), size: points.len(), orders, homogeneous })
}

/// `♯(E ∩ B(a, p^{-n}))`.
pub fn window_count(e: &[PAdicRational], a: &PAdicRational, n: i64) -> usize {
    let ball = Ball::coset(a.clone(), n);
    e.iter().filter(|x| ball.contains(x)).count()
}

fn distinct_points(e: &[PAdicRational]) -> Result<Vec<PAdicRational>> {
    if e.is_empty() {
        return Err(Error::invalid("empty point set"));
    }
    let p = e[0].prime();
    if let Some(x) = e.iter().find(|x| x.prime() != p) {
        return Err(Error::PrimeMismatch(p.get(), x.prime().get()));
    }
    let set: BTreeSet<PAdicRational> = e.iter().cloned().collect();
    Ok(set.into_iter().collect())
}

/// A translation applied to the points of one ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub ball: Ball,
    pub translation: PAdicRational,
}

/// `x ↦ x + shift`, followed by stages of piecewise translations.
///
/// Each piece translates a ball onto itself, so every stage, and hence the
/// whole map, is an isometry of `Q_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    pub shift: PAdicRational,
    pub stages: Vec<Vec<Piece>>,
}

impl Isometry {
    pub fn apply(&self, x: &PAdicRational) -> PAdicRational {
        let mut y = x + &self.shift;
        for stage in &self.stages {
            if let Some(piece) = stage.iter().find(|pc| pc.ball.contains(&y)) {
                y = &y + &piece.translation;
            }
        }
        y
    }

    pub fn is_identity(&self) -> bool {
        self.shift.is_zero() && self.stages.iter().all(Vec::is_empty)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let stages: Vec<serde_json::Value> = self
            .stages
            .iter()
            .map(|stage| {
                stage
                    .iter()
                    .map(|pc| {
                        serde_json::json!({
                            "ball": pc.ball.to_string(),
                            "translation": pc.translation.to_ratio_string(),
                        })
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "shift": self.shift.to_ratio_string(), "stages": stages })
    }
}

/// Maps a homogeneous finite set `E` isometrically onto
/// `Ê = {Σ_{i∈I_E} β_i p^i : 0 ≤ β_i < p}`.
///
/// After translating some point of `E` to 0, the points agree below
/// `min I_E`. At a position `j ∉ I_E` all points of a ball `x + p^j Z_p`
/// share their digit `d` at `j`, and translating that ball by `-d p^j`
/// clears it. Working upward clears every such position up to `γ_E`; a
/// last stage clears the digits above `γ_E`, where each point is alone in
/// its ball.
pub fn canonicalize_discrete(e: &[PAdicRational]) -> Result<(Isometry, Vec<PAdicRational>)> {
    let profile = discrete_profile(e)?;
    if !profile.homogeneous {
        return Err(Error::NotHomogeneous);
    }
    let points = distinct_points(e)?;
    let p = points[0].prime();
    let orders: Vec<i64> = profile.orders.iter().copied().collect();
    let target = digit_sums(p, &orders);
    let anchor = points
        .iter()
        .find(|x| x.is_zero())
        .cloned()
        .unwrap_or_else(|| points[0].clone());
    let shift = -&anchor;
    let mut current: Vec<PAdicRational> = points.iter().map(|x| x + &shift).collect();
    let mut stages = Vec::new();
    if let (Some(&lo), Some(&hi)) = (orders.first(), orders.last()) {
        for j in lo..=hi {
            if profile.orders.contains(&j) {
                continue;
            }
            let mut pieces: Vec<Piece> = Vec::new();
            for x in &current {
                let ball = Ball::coset(x.clone(), j);
                if pieces.iter().any(|pc| pc.ball == ball) {
                    continue;
                }
                let d = x.digits(j, j + 1)[0];
                if d != 0 {
                    let translation = -PAdicRational::new(p, d, j);
                    pieces.push(Piece { ball, translation });
                }
            }
            current = apply_stage(&pieces, &current);
            stages.push(pieces);
        }
    }
    let top = profile.gamma().map_or(i64::MIN, |g| g + 1);
    let mut pieces = Vec::new();
    for x in &current {
        let rest = if top == i64::MIN { x.clone() } else { x - &x.truncate_below(top) };
        if !rest.is_zero() {
            let ball = if top == i64::MIN {
                Ball::coset(x.clone(), x.valuation().finite().unwrap_or(0))
            } else {
                Ball::coset(x.clone(), top)
            };
            pieces.push(Piece { ball, translation: -rest });
        }
    }
    stages.push(pieces);
    stages.retain(|s| !s.is_empty());
    let iso = Isometry { shift, stages };
    let mut image: Vec<PAdicRational> = points.iter().map(|x| iso.apply(x)).collect();
    image.sort();
    if image != target {
        return Err(Error::invalid("internal error: canonical form does not match the target"));
    }
    Ok((iso, target))
}

fn apply_stage(pieces: &[Piece], points: &[PAdicRational]) -> Vec<PAdicRational> {
    points
        .iter()
        .map(|x| match pieces.iter().find(|pc| pc.ball.contains(x)) {
            Some(pc) => x + &pc.translation,
            None => x.clone(),
        })
        .collect()
}

/// `♯(Λ ∩ B(a, p^{γ+s}))`; equals `♯C` at every `a` when `Λ` is a spectrum.
pub fn spectrum_uniform_count(omega: &CompactOpenSet, lambda: &LatticePeriodicSet, a: &PAdicRational) -> u128 {
    lambda.window_count(a, omega.gamma() as i64 + omega.scale())
}

//! Seeded cross-checks between the exact fast paths and independent oracles.

use std::f64::consts::TAU;

use clap::ValueEnum;
use qp_spectral::cyclic_group::{classify, DigitSet};
use qp_spectral::cyclotomic::GroupRingElement;
use qp_spectral::measures::FinitePointMeasure;
use qp_spectral::padic::{PAdicRational, Prime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::Failure;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Random subsets of Z/p^γZ: fast path against brute-force tile and spectrum search.
    Classify,
    /// Random group-ring elements: fiber test against floating-point evaluation.
    Cyclotomic,
    /// Random finite sets: cardinality formula against fattened-set homogeneity.
    Finite,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub count: u64,
    pub disagreements: u64,
    pub first_disagreement: Option<Value>,
}

pub fn run(suite: Suite, count: u64, seed: u64, p: Prime, gamma: u32) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let failures: Vec<Option<Value>> = match suite {
        Suite::Classify => {
            let n = p
                .checked_pow(gamma)
                .filter(|&n| n <= 64)
                .ok_or_else(|| Failure::usage("classify suite needs p^γ ≤ 64"))?;
            let sets = (0..count)
                .map(|_| loop {
                    let c = DigitSet::new(p, gamma, (0..n).filter(|_| rng.gen_bool(0.5)))?;
                    if !c.is_empty() {
                        return Ok(c);
                    }
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            sets.par_iter()
                .map(|c| {
                    let v = classify(c, true);
                    (!v.consistent).then(|| serde_json::to_value(&v).unwrap_or(Value::Null))
                })
                .collect()
        }
        Suite::Cyclotomic => {
            let elements: Vec<GroupRingElement> = (0..count).map(|_| random_element(&mut rng)).collect();
            elements
                .par_iter()
                .map(|z| {
                    let float = complex_abs(z) < 1e-9;
                    (float != z.is_zero()).then(|| json!({ "element": z, "float_zero": float }))
                })
                .collect()
        }
        Suite::Finite => {
            let sets = (0..count)
                .map(|_| random_points(&mut rng))
                .collect::<Result<Vec<_>, Failure>>()?;
            sets.par_iter()
                .map(|f| {
                    let formula = f.is_spectral();
                    let base = f.gamma().unwrap_or(0);
                    let fattened: Vec<bool> = (1..=3)
                        .map(|k| f.fattened(base + k).map(|o| o.is_p_homogeneous()).unwrap_or(!formula))
                        .collect();
                    fattened.iter().any(|&h| h != formula).then(|| {
                        let points: Vec<String> = f.points().iter().map(|x| x.to_ratio_string()).collect();
                        json!({ "points": points, "formula": formula, "fattened": fattened })
                    })
                })
                .collect()
        }
    };
    let disagreements = failures.iter().filter(|f| f.is_some()).count() as u64;
    Ok(Report { suite, seed, count, disagreements, first_disagreement: failures.into_iter().flatten().next() })
}

/// Half plain random combinations, half sums of whole fibers with a small perturbation.
fn random_element(rng: &mut ChaCha8Rng) -> GroupRingElement {
    let p = Prime::new(*[2u64, 3, 5].choose(rng).expect("nonempty")).expect("prime");
    let n = rng.gen_range(1..=6);
    let m = p.pow(n);
    let step = m / p.get();
    let mut terms: Vec<(i64, i64)> = Vec::new();
    if rng.gen_bool(0.5) {
        for _ in 0..rng.gen_range(0..12) {
            terms.push((rng.gen_range(0..m) as i64, rng.gen_range(-5..=5)));
        }
    } else {
        for _ in 0..rng.gen_range(1..4) {
            let r = rng.gen_range(0..step);
            let k = rng.gen_range(-5..=5);
            terms.extend((0..p.get()).map(|j| ((r + j * step) as i64, k)));
        }
        if rng.gen_bool(0.5) {
            terms.push((rng.gen_range(0..m) as i64, rng.gen_range(-5..=5)));
        }
    }
    GroupRingElement::from_coeffs(p, n, terms)
}

fn complex_abs(z: &GroupRingElement) -> f64 {
    let m = z.modulus() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (e, c) in z.terms() {
        let c: f64 = c.to_string().parse().unwrap_or(f64::NAN);
        let angle = TAU * e as f64 / m;
        re += c * angle.cos();
        im += c * angle.sin();
    }
    re.hypot(im)
}

fn random_points(rng: &mut ChaCha8Rng) -> Result<FinitePointMeasure, Failure> {
    let p = Prime::new(*[2u64, 3].choose(rng).expect("nonempty")).expect("prime");
    let size = rng.gen_range(1..=16);
    let shift = rng.gen_range(-3..=3);
    let mut raw: Vec<u64> = (0..size).map(|_| rng.gen_range(0..p.pow(6))).collect();
    raw.sort_unstable();
    raw.dedup();
    let points = raw.into_iter().map(|x| PAdicRational::new(p, x, shift)).collect();
    Ok(FinitePointMeasure::new(points)?)
}

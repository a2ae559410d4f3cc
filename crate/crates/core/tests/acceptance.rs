//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use qp_spectral::construct::{
    canonical_spectrum, canonical_tiling_complement, canonicalize_discrete, discrete_profile, spectral_sum_at,
    spectrum_uniform_count, verify_spectral_pair, verify_tiling_pair, LatticePeriodicSet,
};
use qp_spectral::cyclic_group::{classify, is_spectrum, spectrum_from_levels, tij_set, DigitSet, Verdict};
use qp_spectral::cyclotomic::GroupRingElement;
use qp_spectral::measures::{
    fattened_homogeneous, ifs_orbit, is_spectral_finite, truncate, truncation_certificate, verify_truncation_spectrum,
    FinitePointMeasure, IfsMaps, SingularMeasureSpec,
};
use qp_spectral::padic::{PAdicRational, Prime};
use qp_spectral::set_model::CompactOpenSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn pr(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Every nonempty subset of `Z/p^γZ` as a digit set.
fn all_subsets(p: Prime, gamma: u32) -> impl Iterator<Item = DigitSet> {
    let n = p.pow(gamma);
    (1u64..1 << n).map(move |mask| DigitSet::new(p, gamma, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap())
}

const EXHAUSTIVE: [(u64, u32); 6] = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)];

fn exhaustive_verdicts() -> Vec<Verdict> {
    EXHAUSTIVE
        .iter()
        .flat_map(|&(p, g)| all_subsets(pr(p), g).map(|c| classify(&c, true)))
        .collect()
}

fn disagreement(v: &Verdict) -> bool {
    let oracle = v.oracle.as_ref().expect("oracles ran");
    !v.consistent
        || v.spectral != v.homogeneous
        || v.tile != v.homogeneous
        || oracle.spectral != v.homogeneous
        || oracle.tile != v.homogeneous
        || !(v.routes.tree && v.routes.count && v.routes.fourier) && v.homogeneous
}

fn criterion1(verdicts: &[Verdict]) -> Outcome {
    let bad: Vec<&Verdict> = verdicts.iter().filter(|v| disagreement(v)).collect();
    let homogeneous = verdicts.iter().filter(|v| v.homogeneous).count();
    ensure(bad.is_empty(), || format!("{} disagreements, first {}", bad.len(), serde_json::to_string(bad[0]).unwrap()))?;
    Ok(format!("{} sets, {} spectral = tile = homogeneous, 0 disagreements", verdicts.len(), homogeneous))
}

fn criterion2() -> Outcome {
    let p = pr(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    let mut spectral = 0;
    let count = 100_000;
    for _ in 0..count {
        let c = loop {
            let c = DigitSet::new(p, 3, (0..27).filter(|_| rng.gen_bool(0.5))).unwrap();
            if !c.is_empty() {
                break c;
            }
        };
        let v = classify(&c, true);
        bad += disagreement(&v) as usize;
        spectral += v.spectral as usize;
    }
    ensure(bad == 0, || format!("{} disagreements", bad))?;
    Ok(format!("{} random subsets of Z/27Z, {} spectral, 0 disagreements", count, spectral))
}

fn strings(v: &[PAdicRational]) -> Vec<String> {
    v.iter().map(PAdicRational::to_ratio_string).collect()
}

fn criterion3() -> Outcome {
    let omega = CompactOpenSet::parse("p=2; {1 + 2^3 Z, 4 + 2^3 Z}").map_err(err)?;
    let lambda = canonical_spectrum(&omega).map_err(err)?;
    let t = canonical_tiling_complement(&omega).map_err(err)?;
    ensure(lambda.level() == 3 && strings(lambda.finite()) == ["0", "1/2"], || {
        format!("spectrum {:?} at level {}", strings(lambda.finite()), lambda.level())
    })?;
    ensure(t.level() == 0 && strings(t.finite()) == ["0", "2", "4", "6"], || {
        format!("complement {:?} at level {}", strings(t.finite()), t.level())
    })?;
    let sc = verify_spectral_pair(&omega, &lambda).map_err(err)?;
    let expected = 2usize.pow(sc.residue_level);
    ensure(sc.verified && sc.checks.len() == expected && sc.checks.iter().all(|c| c.holds), || {
        format!("spectral certificate {}", serde_json::to_string(&sc).unwrap())
    })?;
    let target = GroupRingElement::from_coeffs(pr(2), 0, [(0, 4)]);
    for check in &sc.checks {
        let xi = PAdicRational::parse_literal(pr(2), &check.xi).map_err(err)?;
        let s = spectral_sum_at(&omega, &lambda, &xi);
        let level = s.level();
        ensure(s.sub(&target.lift(level)).map_err(err)?.is_zero(), || format!("direct sum fails at {}", check.xi))?;
    }
    let tc = verify_tiling_pair(&omega, &t).map_err(err)?;
    ensure(
        tc.verified && tc.classes.len() as u64 == tc.classes_expected && tc.classes.iter().all(|c| c.exact_cover),
        || format!("tiling certificate {}", serde_json::to_string(&tc).unwrap()),
    )?;
    let wrong = LatticePeriodicSet::from_frequencies(pr(2), 3, &[0, 2]).map_err(err)?;
    ensure(!verify_spectral_pair(&omega, &wrong).map_err(err)?.verified, || "{0, 1/4} accepted".into())?;
    Ok(format!(
        "Λ = {{0, 1/2}} ⊕ 𝕃_3, T = {{0, 2, 4, 6}} ⊕ 𝕃; {} residues and {} classes certified",
        sc.checks.len(),
        tc.classes.len()
    ))
}

fn criterion4() -> Outcome {
    let cases = [
        (SingularMeasureSpec::example1(), vec![0u64, 3, 4, 7]),
        (SingularMeasureSpec::example2(), vec![0, 4, 8, 9, 13, 17, 18, 22, 26]),
    ];
    let mut notes = Vec::new();
    for (spec, digits) in cases {
        let p = spec.prime();
        let c = DigitSet::new(p, 3, digits.iter().copied()).map_err(err)?;
        let v = classify(&c, true);
        ensure(v.homogeneous && v.consistent && v.i.as_deref() == Some(&[0, 2][..]), || {
            format!("verdict {}", serde_json::to_string(&v).unwrap())
        })?;
        let size = c.len() as u64;
        ensure(size == p.pow(2) && size == p.pow(v.i.as_ref().unwrap().len() as u32), || format!("♯C = {}", size))?;
        let f = FinitePointMeasure::from_integers(p, &digits.iter().map(|&x| x as i64).collect::<Vec<_>>())
            .map_err(err)?;
        ensure(is_spectral_finite(&f), || "cardinality formula fails".into())?;

        let omega = CompactOpenSet::from_digits(p, 3, &digits).map_err(err)?;
        let lambda = canonical_spectrum(&omega).map_err(err)?.refine(3).map_err(err)?;
        let cert = verify_spectral_pair(&omega, &lambda).map_err(err)?;
        ensure(cert.verified && cert.checks.len() as u64 == p.pow(3), || {
            format!("{} residues, verified = {}", cert.checks.len(), cert.verified)
        })?;
        let ks = spectrum_from_levels(p, 3, &[0, 2]);
        ensure(is_spectrum(&c, &ks), || "frequency spectrum rejected".into())?;
        let levels: BTreeSet<u32> = [0, 2].into_iter().collect();
        ensure(truncation_certificate(&c, &levels, 3).map_err(err)?.verified, || "residue sweep fails".into())?;

        let maps = IfsMaps::from_spec(&spec, 3).map_err(err)?;
        let d1: Vec<u64> = ifs_orbit(&maps, 1).iter().map(|x| x.to_u64().unwrap()).collect();
        ensure(d1 == digits, || format!("ifs_orbit(1) = {:?}", d1))?;
        let d2: Vec<u64> = ifs_orbit(&maps, 2).iter().map(|x| x.to_u64().unwrap()).collect();
        let (c6, _) = truncate(&spec, 6).map_err(err)?;
        ensure(d2 == c6.elements(), || format!("ifs_orbit(2) has {} points, C_6 has {}", d2.len(), c6.len()))?;
        notes.push(format!("p={}: ♯C={} I={{0,2}} {} residues", p.get(), size, cert.checks.len()));
    }
    Ok(notes.join("; "))
}

fn random_center(rng: &mut ChaCha8Rng, p: Prime) -> PAdicRational {
    PAdicRational::new(p, rng.gen_range(0..p.pow(8)), rng.gen_range(-8..=4))
}

fn criterion5(verdicts: &[Verdict]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sets = 0;
    for v in verdicts.iter().filter(|v| v.homogeneous) {
        let p = pr(v.p);
        let digits = v.set.elements();
        let omega = CompactOpenSet::from_digits(p, v.gamma, &digits).map_err(err)?;
        let lambda = canonical_spectrum(&omega).map_err(err)?;
        let brute = v.oracle.as_ref().and_then(|o| o.spectrum.clone()).expect("oracle spectrum");
        let brute = LatticePeriodicSet::from_frequencies(p, v.gamma, &brute).map_err(err)?;
        for _ in 0..100 {
            let a = random_center(&mut rng, p);
            let n = spectrum_uniform_count(&omega, &lambda, &a);
            ensure(n == omega.digits().len() as u128, || format!("{} points near {} for {{{}}}", n, a, v.set))?;
            let raw = digits.len() as u128;
            ensure(lambda.window_count(&a, v.gamma as i64) == raw, || format!("raw window at {} for {{{}}}", a, v.set))?;
            ensure(brute.window_count(&a, v.gamma as i64) == raw, || format!("brute window at {} for {{{}}}", a, v.set))?;
        }
        sets += 1;
    }
    Ok(format!("{} homogeneous sets × 100 centers, canonical and brute-force spectra uniform", sets))
}

/// Pairwise distances are preserved and the points stay distinct.
fn is_isometric(before: &[PAdicRational], after: &[PAdicRational]) -> bool {
    before.iter().enumerate().all(|(i, x)| {
        before[i + 1..]
            .iter()
            .zip(&after[i + 1..])
            .all(|(y, y2)| (x - y).valuation() == (&after[i] - y2).valuation())
    })
}

fn criterion6(verdicts: &[Verdict]) -> Outcome {
    let (mut spectra, mut complements) = (0, 0);
    for v in verdicts.iter().filter(|v| v.homogeneous) {
        let p = pr(v.p);
        let g = v.gamma as i64;
        let oracle = v.oracle.as_ref().unwrap();
        let i: BTreeSet<i64> = v.i.as_ref().unwrap().iter().map(|&i| i as i64).collect();
        let j: BTreeSet<i64> = (0..g).filter(|x| !i.contains(x)).collect();
        let omega = CompactOpenSet::from_digits(p, v.gamma, &v.set.elements()).map_err(err)?;

        let e: Vec<PAdicRational> =
            oracle.spectrum.as_ref().unwrap().iter().map(|&k| PAdicRational::new(p, k, -g)).collect();
        let profile = discrete_profile(&e).map_err(err)?;
        let expected: BTreeSet<i64> = i.iter().map(|&i| -i - 1).collect();
        ensure(profile.homogeneous && profile.orders == expected, || {
            format!("spectrum orders {:?} vs {:?} for {{{}}}", profile.orders, expected, v.set)
        })?;
        let (iso, image) = canonicalize_discrete(&e).map_err(err)?;
        let mapped: Vec<PAdicRational> = e.iter().map(|x| iso.apply(x)).collect();
        ensure(is_isometric(&e, &mapped), || format!("spectrum map not isometric for {{{}}}", v.set))?;
        let canonical = canonical_spectrum(&omega).map_err(err)?.refine(g).map_err(err)?;
        let (_, target) = canonicalize_discrete(canonical.finite()).map_err(err)?;
        ensure(image == target, || format!("spectrum canonical form differs for {{{}}}", v.set))?;
        spectra += 1;

        let t: Vec<PAdicRational> =
            oracle.complement.as_ref().unwrap().iter().map(|&k| PAdicRational::from_integer(p, k)).collect();
        let profile = discrete_profile(&t).map_err(err)?;
        ensure(profile.homogeneous && profile.orders == j, || {
            format!("complement orders {:?} vs {:?} for {{{}}}", profile.orders, j, v.set)
        })?;
        let (iso, image) = canonicalize_discrete(&t).map_err(err)?;
        let mapped: Vec<PAdicRational> = t.iter().map(|x| iso.apply(x)).collect();
        ensure(is_isometric(&t, &mapped), || format!("complement map not isometric for {{{}}}", v.set))?;
        let canonical = canonical_tiling_complement(&omega).map_err(err)?.refine(0).map_err(err)?;
        let (_, target) = canonicalize_discrete(canonical.finite()).map_err(err)?;
        ensure(image == target, || format!("complement canonical form differs for {{{}}}", v.set))?;
        complements += 1;
    }
    Ok(format!("{} spectra and {} complements match the canonical forms", spectra, complements))
}

fn float_abs(z: &GroupRingElement) -> f64 {
    let m = z.modulus() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (e, c) in z.terms() {
        let c: f64 = c.to_string().parse().unwrap();
        let angle = TAU * e as f64 / m;
        re += c * angle.cos();
        im += c * angle.sin();
    }
    re.hypot(im)
}

/// Coefficients in `[-5, 5]`: half uniformly random, half built from whole
/// fibers (vanishing) with an occasional single-term perturbation.
fn random_element(rng: &mut ChaCha8Rng) -> GroupRingElement {
    let p = pr(*[2u64, 3, 5].choose(rng).unwrap());
    let n = rng.gen_range(1..=6);
    let m = p.pow(n);
    let step = m / p.get();
    let mut coeffs = std::collections::BTreeMap::new();
    if rng.gen_bool(0.5) {
        for _ in 0..rng.gen_range(0..16) {
            coeffs.insert(rng.gen_range(0..m), rng.gen_range(-5i64..=5));
        }
    } else {
        let mut residues: Vec<u64> = (0..step).collect();
        residues.shuffle(rng);
        for &r in residues.iter().take(rng.gen_range(1..=4)) {
            let k = rng.gen_range(-5i64..=5);
            for j in 0..p.get() {
                coeffs.insert(r + j * step, k);
            }
        }
        if rng.gen_bool(0.5) {
            coeffs.insert(rng.gen_range(0..m), rng.gen_range(-5i64..=5));
        }
    }
    GroupRingElement::from_coeffs(p, n, coeffs.into_iter().map(|(e, c)| (e as i64, c)))
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut zeros = 0;
    for _ in 0..10_000 {
        let z = random_element(&mut rng);
        let float = float_abs(&z) < 1e-9;
        ensure(float == z.is_zero(), || format!("{} : exact {} vs float {}", z, z.is_zero(), float))?;
        zeros += float as usize;
    }
    for _ in 0..1_000 {
        let p = pr(*[2u64, 3, 5].choose(&mut rng).unwrap());
        let n = rng.gen_range(1..=6);
        let step = p.pow(n) / p.get();
        let chosen: Vec<u64> = loop {
            let c: Vec<u64> = (0..step).filter(|_| rng.gen_bool(0.3)).collect();
            if !c.is_empty() {
                break c;
            }
        };
        let support: Vec<u64> = chosen.iter().flat_map(|&r| (0..p.get()).map(move |j| r + j * step)).collect();
        let z = GroupRingElement::from_exponents(p, n, support.iter().map(|&e| e as i64));
        let blocks = z.decompose_zero_sum().map_err(err)?;
        let mut covered: Vec<u64> = blocks.iter().flatten().copied().collect();
        covered.sort_unstable();
        let mut expected = support.clone();
        expected.sort_unstable();
        ensure(covered == expected, || format!("blocks of {} do not partition the support", z))?;
        for b in &blocks {
            let piece = GroupRingElement::from_exponents(p, n, b.iter().map(|&e| e as i64));
            ensure(piece.is_zero() && float_abs(&piece) < 1e-9, || format!("block {:?} of {} is not a zero sum", b, z))?;
        }
    }
    Ok(format!("10000 elements ({} vanishing) agree with floating point; 1000 decompositions valid", zeros))
}

/// Half arbitrary points, half random `T_{I,J}`-form sets with noise above `γ`.
fn random_finite(rng: &mut ChaCha8Rng, p: Prime) -> FinitePointMeasure {
    let digits: Vec<u64> = if rng.gen_bool(0.5) {
        let size = rng.gen_range(1..=16);
        (0..size).map(|_| rng.gen_range(0..p.pow(8))).collect()
    } else {
        let gamma = rng.gen_range(0..=6);
        let max_i = if p.get() == 2 { 4 } else { 2 };
        let mut levels: Vec<u32> = (0..gamma).collect();
        levels.shuffle(rng);
        let i: BTreeSet<u32> = levels.into_iter().take(rng.gen_range(0..=max_i)).collect();
        let salt: u64 = rng.gen();
        let c = tij_set(p, gamma, &i, |n, prefix| {
            prefix.iter().fold(salt ^ n as u64, |h, &d| h.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(d)) >> 7
        })
        .unwrap();
        let high = p.pow(gamma + 1);
        c.elements().into_iter().map(|x| x + high * rng.gen_range(0..p.pow(2))).collect()
    };
    let mut digits = digits;
    digits.sort_unstable();
    digits.dedup();
    FinitePointMeasure::new(digits.into_iter().map(|x| PAdicRational::from_integer(p, x)).collect()).unwrap()
}

fn criterion8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut spectral = 0;
    for p in [2, 3] {
        for _ in 0..1_000 {
            let f = random_finite(&mut rng, pr(p));
            let formula = is_spectral_finite(&f);
            let base = f.gamma().unwrap_or(0);
            for k in 1..=3 {
                let h = fattened_homogeneous(&f, base + k).map_err(err)?;
                ensure(h == formula, || {
                    format!("{:?} at γ_F+{}: formula {} vs fattened {}", strings(f.points()), k, formula, h)
                })?;
            }
            spectral += formula as usize;
        }
    }
    Ok(format!("2000 finite sets ({} spectral), formula = fattened homogeneity at γ_F+1..3", spectral))
}

fn float_truncation_check(spec: &SingularMeasureSpec, gamma0: u32, gamma: u32) -> bool {
    let (c, _) = truncate(spec, gamma).unwrap();
    let p = spec.prime();
    let n = p.pow(gamma0) as f64;
    let levels: Vec<u32> = spec.i_levels(gamma0).into_iter().collect();
    let lambda = spectrum_from_levels(p, gamma0, &levels);
    let size = c.len() as f64;
    (0..p.pow(gamma0)).all(|k| {
        let total: f64 = lambda
            .iter()
            .map(|&l| {
                let (mut re, mut im) = (0.0, 0.0);
                for x in c.elements() {
                    let angle = -TAU * (x as f64) * (l as f64 - k as f64) / n;
                    re += angle.cos();
                    im += angle.sin();
                }
                re * re + im * im
            })
            .sum();
        (total - size * size).abs() < 1e-6 * size * size
    })
}

fn criterion9() -> Outcome {
    let runs = [
        ("example1", SingularMeasureSpec::example1(), vec![3u32, 6, 9]),
        ("example2", SingularMeasureSpec::example2(), vec![3, 6]),
    ];
    let mut notes = Vec::new();
    for (name, spec, gammas) in runs {
        for gamma in gammas {
            let cert = verify_truncation_spectrum(&spec, 3, gamma).map_err(err)?;
            ensure(cert.verified && cert.checks.len() as u64 == spec.prime().pow(3), || {
                format!("{} γ={} failed: {}", name, gamma, serde_json::to_string(&cert).unwrap())
            })?;
            ensure(float_truncation_check(&spec, 3, gamma), || format!("{} γ={} float oracle", name, gamma))?;
            notes.push(format!("{} γ={} (♯C={})", name, gamma, cert.size));
        }
    }
    let corrupted = DigitSet::new(pr(2), 3, [0, 2, 3, 4, 6, 7]).unwrap();
    let levels: BTreeSet<u32> = [0, 2].into_iter().collect();
    ensure(!truncation_certificate(&corrupted, &levels, 3).map_err(err)?.verified, || "corrupted set passes".into())?;
    Ok(notes.join(", "))
}

fn report(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {}: {} [{:.1}s] {}", n, name, secs, detail);
            true
        }
        Err(detail) => {
            println!("FAIL criterion {}: {} [{:.1}s] {}", n, name, secs, detail);
            false
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let verdicts = exhaustive_verdicts();
    println!("classified {} sets with oracles in {:.1}s", verdicts.len(), start.elapsed().as_secs_f64());
    let results = [
        report(1, "exhaustive equivalence, p=2 γ≤4 and p=3 γ≤2", || criterion1(&verdicts)),
        report(2, "sampled equivalence on Z/27Z", criterion2),
        report(3, "two-ball fixture in Q_2", criterion3),
        report(4, "digit-set examples and iterated function systems", criterion4),
        report(5, "uniform distribution of spectra", || criterion5(&verdicts)),
        report(6, "spectrum and complement structure", || criterion6(&verdicts)),
        report(7, "cyclotomic soundness", criterion7),
        report(8, "finite-set spectrality", criterion8),
        report(9, "truncation certificates", criterion9),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{}/{} criteria passed", passed, results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
